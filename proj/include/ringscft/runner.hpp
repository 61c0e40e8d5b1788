#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ringscft/config.hpp"
#include "ringscft/observables.hpp"
#include "ringscft/reference.hpp"
#include "ringscft/scf.hpp"
#include "ringscft/tensors.hpp"

namespace ringscft {

struct RunOutcome {
  int Z = 0;
  RunConfig config;
  BasisSet basis;
  TensorSet tensors;
  Eigen::Index kept = 0;
  ScfResult scf;
  EnergyReport energies;
  ConstraintRatios ratios;
  Deviation deviation;
  double seconds = 0.0;
};

inline BasisSet basis_for(const RunConfig& c) {
  BasisSet b(c.channels.empty() ? basis_preset("desk") : c.channels);
  return c.scf.spherical_only ? spherical_subset(b) : b;
}

/// Assemble tensors, using and refreshing the Gamma cache when configured.
inline TensorSet tensors_for(const BasisSet& basis, const std::string& cache) {
  TensorSet t;
  t.S = assemble_overlap(basis);
  t.L = assemble_laplace(basis, t.S);
  t.f0 = basis_at_origin(basis);
  if (!cache.empty() && load_gamma_cache(cache, basis, t.gamma)) return t;
  t.gamma = assemble_gamma(basis, RealGauntTable(basis.max_l()));
  if (!cache.empty()) save_gamma_cache(cache, basis, t.gamma);
  return t;
}

/// Converge one element and evaluate every observable; no file output.
inline RunOutcome run_element(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome o;
  o.config = cfg;
  o.Z = resolve_element(cfg.element);
  o.config.scf.Z = o.Z;
  o.basis = basis_for(cfg);
  o.tensors = tensors_for(o.basis, cfg.gamma_cache);
  const BlockOps ops(o.basis, o.tensors, cfg.scf.eig_threshold);
  o.kept = ops.kept();
  o.scf = scf_iterate(o.config.scf, o.basis, o.tensors, ops);
  const QuadGrid g(cfg.quad_grid);
  o.energies = energy_report(o.scf, o.basis, o.tensors, g, cfg.scf.beta);
  o.ratios = check_constraints(o.scf, o.basis, o.tensors, g);
  o.deviation = compare_reference(o.energies.binding(), o.Z, cfg.scf.spherical_only);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline nlohmann::ordered_json energy_row_json(const EnergyRow& r) {
  return {{"U_en", r.U_en},
          {"U_ee", r.U_ee},
          {"U_sic", r.U_sic},
          {"U_P", r.U_P},
          {"U", r.U},
          {"minus_Sc_over_beta", r.minus_Sc_over_beta},
          {"minus_St_over_beta", r.minus_St_over_beta},
          {"F", r.F},
          {"K", r.K}};
}

inline nlohmann::ordered_json report_json(const RunOutcome& o) {
  using nlohmann::ordered_json;
  const auto& c = o.config;
  ordered_json j;
  j["element"] = element_symbol(o.Z);
  j["Z"] = o.Z;
  j["timestamp"] = utc_timestamp();
  j["converged"] = o.scf.converged;
  j["iterations"] = o.scf.iterations;
  j["residual"] = o.scf.residual;
  j["settings"] = {{"beta", c.scf.beta},       {"g0", c.scf.g0},
                   {"g0_per_pair", c.scf.g0_per_pair}, {"mixing", c.scf.mixing},
                   {"anderson", c.scf.anderson}, {"tol", c.scf.tol},
                   {"max_iter", c.scf.max_iter}, {"perturb", c.scf.perturb},
                   {"seed", c.scf.seed},         {"spherical_only", c.scf.spherical_only},
                   {"eig_threshold", c.scf.eig_threshold}};
  ordered_json chans = ordered_json::array();
  for (const auto& ch : o.basis.channels())
    chans.push_back({{"l", ch.l}, {"count", ch.count}, {"c_min", ch.c_min}, {"c_max", ch.c_max}});
  j["basis"] = {{"channels", chans}, {"size", o.basis.size()}, {"retained", o.kept}};
  j["binding_energy"] = o.energies.binding();
  ordered_json pairs = ordered_json::array();
  for (std::size_t mu = 0; mu < o.scf.pairs.size(); ++mu) {
    auto row = energy_row_json(o.energies.pairs[mu]);
    ordered_json p;
    p["pair"] = mu + 1;
    p["N_mu"] = o.scf.pairs[mu].N_mu;
    for (auto& [k, v] : row.items()) p[k] = v;
    std::vector<double> top;
    const auto& D = o.scf.pairs[mu].eig.D;
    for (Eigen::Index a = 0; a < std::min<Eigen::Index>(5, D.size()); ++a) top.push_back(D[a]);
    p["leading_eigenvalues"] = top;
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  j["total"] = energy_row_json(o.energies.total);
  const EnergyRow& T = o.energies.total;
  j["decomposition_residual"] =
      std::abs(T.F - (T.U + T.minus_Sc_over_beta + T.minus_St_over_beta)) / std::abs(T.F);
  const auto& ref = reference_for(o.Z);
  j["constraints"] = {{"ratio1", o.ratios.ratio1},
                      {"ratio2", o.ratios.ratio2},
                      {"published_ratio1", ref.ratio1},
                      {"published_ratio2", ref.ratio2}};
  j["reference"] = {{"hartree_fock", o.deviation.hf},
                    {"pct_dev_hartree_fock", o.deviation.pct_dev_hf},
                    {"published_scft", o.deviation.published},
                    {"pct_dev_published_scft", o.deviation.pct_dev_published}};
  return j;
}

inline std::string format_theta(double deg) {
  std::ostringstream os;
  if (std::abs(deg - std::round(deg)) < 1e-9) os << static_cast<long long>(std::llround(deg));
  else os << deg;
  return os.str();
}

/// Binary grayscale PPM of the total density on the cone theta = const,
/// drawn as (r cos phi, r sin phi). Writes a linear and a log10 variant.
inline void write_slice_ppm(const RunOutcome& o, double theta_deg, const std::string& dir) {
  const int N = o.config.slice_pixels;
  const double E = o.config.slice_extent;
  const double th = theta_deg * kPi / 180.0;
  std::vector<double> v(static_cast<std::size_t>(N) * N, 0.0);
  double vmax = 0.0;
  for (int py = 0; py < N; ++py)
    for (int px = 0; px < N; ++px) {
      const double x = -E + 2.0 * E * (px + 0.5) / N;
      const double y = E - 2.0 * E * (py + 0.5) / N;
      const double r = std::hypot(x, y);
      const double ph = std::atan2(y, x);
      const Vector f = eval_basis(o.basis, r, th, ph);
      double n = 0.0;
      for (const auto& p : o.scf.pairs) n += eigen_density_at(p.eig, p.pf, p.N_mu, f);
      v[static_cast<std::size_t>(py) * N + px] = n;
      vmax = std::max(vmax, n);
    }
  auto write = [&](const std::string& path, bool log_scale) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "P6\n" << N << " " << N << "\n255\n";
    const double decades = 6.0;
    for (double n : v) {
      double t;
      if (vmax <= 0.0) t = 0.0;
      else if (log_scale) t = n > 0.0 ? (std::log10(n / vmax) + decades) / decades : 0.0;
      else t = n / vmax;
      const auto c = static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
      const unsigned char rgb[3] = {c, c, c};
      os.write(reinterpret_cast<const char*>(rgb), 3);
    }
  };
  const std::string stem = dir + "/slice_theta_" + format_theta(theta_deg);
  write(stem + ".ppm", false);
  write(stem + "_log.ppm", true);
}

/// Per-pair and total propagator-route densities on the export grid.
inline void write_density_csv(const RunOutcome& o, const std::string& dir) {
  const QuadGrid g(o.config.export_grid);
  const GridBasis gb(o.basis, g);
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(g.n_radial()), static_cast<Eigen::Index>(g.n_angular()));
  auto dump = [&](const std::string& path, const Matrix& n) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot write " + path);
    std::fprintf(fp, "r,theta,phi,density\n");
    for (std::size_t k = 0; k < g.n_radial(); ++k)
      for (std::size_t a = 0; a < g.n_angular(); ++a)
        std::fprintf(fp, "%.12e,%.12e,%.12e,%.12e\n", g.r[k], g.theta[a], g.phi[a],
                     n(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)));
    std::fclose(fp);
  };
  for (std::size_t mu = 0; mu < o.scf.pairs.size(); ++mu) {
    const GridDensity d = pair_density_on_grid(o.scf.pairs[mu], gb, g);
    total += d.n;
    dump(dir + "/pair_" + std::to_string(mu + 1) + ".csv", d.n);
  }
  dump(dir + "/total.csv", total);
}

inline void write_iteration_log(const RunOutcome& o, const std::string& dir) {
  std::ofstream os(dir + "/iterations.log");
  if (!os) throw std::runtime_error("cannot write " + dir + "/iterations.log");
  os << "# iter residual F mixing\n";
  os << std::setprecision(12);
  for (const auto& r : o.scf.trace) os << r.iter << " " << r.residual << " " << r.F << " " << r.mixing << "\n";
}

inline void write_artifacts(const RunOutcome& o, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir + "/report.json");
    if (!os) throw std::runtime_error("cannot write " + dir + "/report.json");
    os << report_json(o).dump(2) << "\n";
  }
  if (o.config.emit_iteration_log) write_iteration_log(o, dir);
  if (o.config.emit_density) write_density_csv(o, dir);
  if (o.config.emit_heatmap)
    for (double th : o.config.slice_theta_deg) write_slice_ppm(o, th, dir);
}

/// Full single-element run; returns 0 on convergence, 2 otherwise.
inline int run(const RunConfig& cfg, RunOutcome* out = nullptr) {
  RunOutcome o = run_element(cfg);
  write_artifacts(o, cfg.out_dir);
  const int status = o.scf.converged ? 0 : 2;
  if (out) *out = std::move(o);
  return status;
}

struct SweepRow {
  std::string element;
  int Z = 0;
  bool ok = false;
  bool converged = false;
  std::string error;
  double binding = 0.0;
  Deviation deviation;
  ConstraintRatios ratios;
};

/// Run each element into out_dir/<symbol>; failures are recorded per row.
inline std::vector<SweepRow> sweep(const std::vector<std::string>& elements, const RunConfig& tmpl) {
  std::vector<SweepRow> rows(elements.size());
  auto one = [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.element = elements[k];
    try {
      RunConfig c = tmpl;
      c.element = elements[k];
      row.Z = resolve_element(c.element);
      c.out_dir = tmpl.out_dir + "/" + element_symbol(row.Z);
      RunOutcome o;
      run(c, &o);
      row.ok = true;
      row.converged = o.scf.converged;
      row.binding = o.energies.binding();
      row.deviation = o.deviation;
      row.ratios = o.ratios;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  if (tmpl.scf.threads > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = 0; k < elements.size(); ++k) jobs.push_back(std::async(std::launch::async, one, k));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t k = 0; k < elements.size(); ++k) one(k);
  }
  return rows;
}

inline nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["element"] = r.element;
    j["ok"] = r.ok;
    if (!r.ok) {
      j["error"] = r.error;
    } else {
      j["converged"] = r.converged;
      j["binding_energy"] = r.binding;
      j["hartree_fock"] = r.deviation.hf;
      j["pct_dev_hartree_fock"] = r.deviation.pct_dev_hf;
      j["published_scft"] = r.deviation.published;
      j["ratio1"] = r.ratios.ratio1;
      j["ratio2"] = r.ratios.ratio2;
    }
    arr.push_back(j);
  }
  return {{"timestamp", utc_timestamp()}, {"rows", arr}};
}

/// Plain-text table: binding energies against HF, then the constraint ratios.
inline std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  char buf[256];
  os << "Element  SCFT          Hartree-Fock   %Deviation   ratio1    ratio2\n";
  for (const auto& r : rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%-8s failed: %s\n", r.element.c_str(), r.error.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%-8s %-13.7f %-14.9f %-12.6f %-9.5f %-9.5f%s\n",
                    element_symbol(r.Z).c_str(), r.binding, r.deviation.hf, r.deviation.pct_dev_hf,
                    r.ratios.ratio1, r.ratios.ratio2, r.converged ? "" : "  (not converged)");
    }
    os << buf;
  }
  return os.str();
}

}  // namespace ringscft
