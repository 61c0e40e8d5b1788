#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "../unit/oracles.hpp"

using namespace ringscft;
using namespace ringscft::testing;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%d] %s ... %s (%s)\n", id, what.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Run {
  RunOutcome o;
  double worst_trace = 0.0;
  int checked_iterations = 0;
};

// Same pipeline as run_element, with the per-iteration trace invariant enabled.
Run run_checked(const std::string& element, bool spherical, double beta = 600.0, double tol = -1.0) {
  RunConfig cfg;
  cfg.element = element;
  cfg.scf.anderson = true;
  cfg.scf.spherical_only = spherical;
  cfg.scf.beta = beta;
  if (tol > 0) cfg.scf.tol = tol;
  Run r;
  RunOutcome& o = r.o;
  o.config = cfg;
  o.Z = resolve_element(element);
  o.config.scf.Z = o.Z;
  o.basis = basis_for(cfg);
  o.tensors = tensors_for(o.basis, "");
  const BlockOps ops(o.basis, o.tensors, cfg.scf.eig_threshold);
  o.kept = ops.kept();
  const Matrix& S = o.tensors.S;
  auto check = [&](int it, const std::vector<PairState>& pairs, std::vector<std::string>& log) {
    for (const auto& p : pairs) {
      const double e = std::abs(trace_identity_error(p.eig, p.pf, S));
      r.worst_trace = std::max(r.worst_trace, e);
      if (e >= 1e-10) log.push_back("iteration " + std::to_string(it) + ": trace identity error " + std::to_string(e));
    }
    ++r.checked_iterations;
  };
  o.scf = scf_iterate(o.config.scf, o.basis, o.tensors, ops, {}, check);
  const QuadGrid g(cfg.quad_grid);
  o.energies = energy_report(o.scf, o.basis, o.tensors, g, cfg.scf.beta);
  o.ratios = check_constraints(o.scf, o.basis, o.tensors, g);
  o.deviation = compare_reference(o.energies.binding(), o.Z, spherical);
  return r;
}

double l_positive_max(const BasisSet& b, const Vector& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.index(i).l > 0) s = std::max(s, std::abs(c[static_cast<Eigen::Index>(i)]));
  return s;
}

std::vector<std::array<double, 3>> random_points(int count, double rmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r(0.0, rmax), t(0.0, M_PI), p(0.0, 2.0 * M_PI);
  std::vector<std::array<double, 3>> pts;
  for (int k = 0; k < count; ++k) pts.push_back({r(rng), t(rng), p(rng)});
  return pts;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<int, Run> runs;
  for (int z = 1; z <= 10; ++z) {
    runs.emplace(z, run_checked(element_symbol(z), false));
    const RunOutcome& o = runs.at(z).o;
    std::printf("  ran %-2s  binding %.7f  iterations %d  converged %d\n", element_symbol(z).c_str(),
                o.energies.binding(), o.scf.iterations, o.scf.converged ? 1 : 0);
    std::fflush(stdout);
  }
  const Run c_sph = run_checked("C", true);

  {
    const RunOutcome& h = runs.at(1).o;
    const double b = h.energies.binding();
    report(1, "hydrogen binding 0.5 at beta >= 50", h.scf.converged && h.config.scf.beta >= 50 && std::abs(b - 0.5) < 1e-5,
           "binding " + fmt("%.8f", b) + ", beta " + fmt("%g", h.config.scf.beta));
  }
  {
    const RunOutcome& he = runs.at(2).o;
    const double b = he.energies.binding();
    report(2, "helium binding 2.861680 within 1e-4", he.scf.converged && std::abs(b - 2.861680) < 1e-4,
           "binding " + fmt("%.7f", b));
  }
  {
    bool pass = true;
    std::ostringstream d;
    for (int z : {3, 4, 5}) {
      const RunOutcome& o = runs.at(z).o;
      const double ref = reference_for(z).scft_angular, b = o.energies.binding();
      const double rel = std::abs(b - ref) / ref;
      pass = pass && o.scf.converged && rel < 5e-3;
      double lo = 1e300, hi = -1e300;
      for (double beta : {25.0, 50.0, 100.0}) {
        const Run s = run_checked(element_symbol(z), false, beta, 1e-6);
        pass = pass && s.o.scf.converged;
        lo = std::min(lo, s.o.energies.binding());
        hi = std::max(hi, s.o.energies.binding());
      }
      const double drift = (hi - lo) / hi;
      pass = pass && drift <= 1e-3;
      d << element_symbol(z) << " " << fmt("%.5f", b) << " dev " << fmt("%.2e", rel) << " beta-drift "
        << fmt("%.2e", drift) << "; ";
    }
    report(3, "Li, Be, B within 0.5% and stable over beta 25..100", pass, d.str());
  }
  const RunOutcome& c = runs.at(6).o;
  {
    const double a = c.energies.binding(), s = c_sph.o.energies.binding();
    const auto F = free_energy(c.scf, c.tensors, c.config.scf.beta);
    bool lobes = true;
    for (std::size_t mu : {1u, 2u})
      lobes = lobes && l_positive_max(c.basis, c.scf.pairs[mu].n) > 1e-2 * c.scf.pairs[mu].n.cwiseAbs().maxCoeff();
    const double dF = std::abs(F[1] - F[2]);
    const bool pass = c.scf.converged && c_sph.o.scf.converged &&
                      std::abs(s - 37.567740) / 37.567740 < 5e-3 && std::abs(a - 37.655254) / 37.655254 < 5e-3 &&
                      a > s && lobes && dF < 1e-3;
    report(4, "carbon spherical vs angular basis and outer-pair symmetry breaking", pass,
           "spherical " + fmt("%.5f", s) + ", angular " + fmt("%.5f", a) + ", |F2-F3| " + fmt("%.1e", dF) +
               ", outer pairs non-spherical " + (lobes ? "yes" : "no"));
  }
  {
    const EnergyRow& A = c.energies.total;
    const EnergyRow& S = c_sph.o.energies.total;
    const auto& ref = kCarbonAngularTotal[0].v;
    auto within = [](double x, double r) { return std::abs(x - r) <= 0.02 * std::abs(r); };
    const bool dirs = A.U_en < S.U_en && A.U_ee > S.U_ee && A.minus_Sc_over_beta > S.minus_Sc_over_beta;
    const bool mags = within(A.U_en, ref[0]) && within(A.U_ee, ref[1]) && within(A.minus_Sc_over_beta, ref[5]);
    report(5, "carbon angular relaxation: U_en down, U_ee and -S_c/beta up", dirs && mags,
           "U_en " + fmt("%.4f", S.U_en) + " -> " + fmt("%.4f", A.U_en) + ", U_ee " + fmt("%.4f", S.U_ee) + " -> " +
               fmt("%.4f", A.U_ee) + ", -S_c/beta " + fmt("%.4f", S.minus_Sc_over_beta) + " -> " +
               fmt("%.4f", A.minus_Sc_over_beta));
  }
  {
    bool pass = true;
    std::ostringstream d;
    for (int z = 1; z <= 10; ++z) {
      const ConstraintRatios& r = runs.at(z).o.ratios;
      const ReferenceRow& ref = reference_for(z);
      bool ok = r.ratio1 <= 1.0 + 1e-5 && r.ratio2 <= 1.0 + 1e-5;
      if (z <= 2) ok = ok && r.ratio2 >= 0.999;
      else ok = ok && std::abs(r.ratio1 - ref.ratio1) <= 0.02 && std::abs(r.ratio2 - ref.ratio2) <= 0.02;
      pass = pass && ok;
      d << element_symbol(z) << " " << fmt("%.4f", r.ratio1) << "/" << fmt("%.4f", r.ratio2) << (ok ? "" : "!") << " ";
    }
    report(6, "density constraint ratios bounded and close to reference", pass, d.str());
  }
  {
    double worst_dec = 0.0, worst_sum = 0.0;
    for (const auto& [z, r] : runs) {
      const EnergyRow& T = r.o.energies.total;
      worst_dec = std::max(worst_dec, std::abs(T.F - (T.U + T.minus_Sc_over_beta + T.minus_St_over_beta)) / std::abs(T.F));
      EnergyRow s;
      for (const auto& p : r.o.energies.pairs) s += p;
      for (double d : {s.U_en - T.U_en, s.U_ee - T.U_ee, s.U_sic - T.U_sic, s.U_P - T.U_P, s.U - T.U,
                       s.minus_Sc_over_beta - T.minus_Sc_over_beta, s.minus_St_over_beta - T.minus_St_over_beta,
                       s.F - T.F})
        worst_sum = std::max(worst_sum, std::abs(d));
    }
    report(7, "free energy decomposition and per-pair sums", worst_dec < 1e-5 && worst_sum < 1e-8,
           "worst relative residual " + fmt("%.2e", worst_dec) + ", worst pair-sum gap " + fmt("%.2e", worst_sum));
  }
  {
    const BasisSet b = oracle_basis();
    const TensorSet t = assemble_tensors(b);
    const TensorOracle o{b};
    bool tensors_ok = true;
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        tensors_ok = tensors_ok && close_rel(t.S(ii, jj), o.S(i, j), 1e-8) && close_rel(t.L(ii, jj), o.L(i, j), 1e-8);
        for (std::size_t k = j; k < n; ++k) tensors_ok = tensors_ok && close_rel(t.gamma(i, j, k), o.G(i, j, k), 1e-8);
      }
    double worst_gaunt = 0.0, worst_3j = 0.0;
    for (int l1 = 0; l1 <= 6; ++l1)
      for (int l2 = 0; l2 <= 6; ++l2)
        for (int l3 = 0; l3 <= 6; ++l3)
          for (int m1 = -l1; m1 <= l1; ++m1)
            for (int m2 = -l2; m2 <= l2; ++m2)
              for (int m3 = -l3; m3 <= l3; ++m3) {
                worst_3j = std::max(worst_3j, std::abs(wigner3j(l1, l2, l3, m1, m2, m3) - racah3j(l1, l2, l3, m1, m2, m3)));
                if (l1 <= 4 && l2 <= 4 && l3 <= 4)
                  worst_gaunt = std::max(worst_gaunt, std::abs(real_gaunt(l1, m1, l2, m2, l3, m3) -
                                                               quad_real_gaunt(l1, m1, l2, m2, l3, m3)));
              }
    report(8, "tensor, real Gaunt and 3-j oracles", tensors_ok && worst_gaunt < 1e-10 && worst_3j < 1e-12,
           std::string("S/L/Gamma on 12 functions ") + (tensors_ok ? "ok" : "mismatch") + ", real Gaunt l<=4 " +
               fmt("%.1e", worst_gaunt) + ", 3-j l<=6 " + fmt("%.1e", worst_3j));
  }
  {
    double worst = 0.0;
    int pairs = 0;
    const auto pts = random_points(1000, 6.0, 2024);
    for (const auto& [z, r] : runs)
      for (const auto& p : r.o.scf.pairs) {
        worst = std::max(worst, ks_consistency(p.eig, r.o.config.scf.beta, p.N_mu, r.o.basis, pts));
        ++pairs;
      }
    report(9, "propagator and orbital densities agree at random points", worst < 1e-10,
           "worst relative gap " + fmt("%.2e", worst) + " over " + std::to_string(pairs) + " pairs");
  }
  {
    double worst_norm = 0.0, min_density = 0.0, worst_trace = 0.0;
    std::size_t logged = 0;
    int iters = 0;
    for (const auto& [z, r] : runs) {
      const QuadGrid g(r.o.config.quad_grid);
      const GridBasis gb(r.o.basis, g);
      for (const auto& p : r.o.scf.pairs) {
        const GridDensity d = pair_density_on_grid(p, gb, g);
        worst_norm = std::max(worst_norm, std::abs(g.integrate(d.n) - p.N_mu));
        min_density = std::min(min_density, d.n.minCoeff());
      }
      worst_trace = std::max(worst_trace, r.worst_trace);
      logged += r.o.scf.invariant_log.size();
      iters += r.checked_iterations;
    }
    report(10, "pair normalization, positivity and per-iteration trace identity",
           worst_norm < 1e-6 && min_density >= -1e-12 && logged == 0,
           "worst |int n - N| " + fmt("%.2e", worst_norm) + ", min density " + fmt("%.2e", min_density) +
               ", worst trace error " + fmt("%.2e", worst_trace) + " over " + std::to_string(iters) + " iterations");
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criteria failed, %.0f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
