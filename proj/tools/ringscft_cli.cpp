// Command-line driver: single-element runs and element sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ringscft/ringscft.hpp"

using namespace ringscft;

int main(int argc, char** argv) {
  CLI::App app{"Ring-polymer SCFT for neutral atoms H..Ne"};
  app.set_config();  // disable CLI11's own config handling; --config is ours

  std::string element, config_path, basis, grid, out;
  double beta = 0, g0 = 0, tol = 0, mixing = 0, perturb = 0;
  std::vector<double> g0_pairs;
  int max_iter = 0;
  std::uint64_t seed = 0;
  bool spherical = false, compare = false, anderson = false;

  app.add_option("-Z,--element", element, "Element symbol or atomic number (1..10)");
  app.add_option("--config", config_path, "Flat key = value config file");
  auto* o_beta = app.add_option("--beta", beta, "Inverse temperature (1/Hartree)");
  auto* o_g0 = app.add_option("--g0", g0, "Pauli strength constant");
  auto* o_g0p = app.add_option("--g0-per-pair", g0_pairs, "Per-pair g0 values")->delimiter(',');
  auto* o_tol = app.add_option("--tol", tol, "Convergence tolerance on density coefficients");
  auto* o_iter = app.add_option("--max-iter", max_iter, "Iteration cap");
  auto* o_mix = app.add_option("--mixing", mixing, "Linear mixing fraction in (0, 1]");
  auto* o_seed = app.add_option("--seed", seed, "Symmetry-breaking seed");
  auto* o_pert = app.add_option("--perturb", perturb, "Symmetry-breaking amplitude");
  auto* o_sph = app.add_flag("--spherical-only", spherical, "Restrict the basis to l = 0");
  auto* o_and = app.add_flag("--anderson", anderson, "Enable Anderson acceleration near convergence");
  auto* o_basis = app.add_option("--basis", basis, "Preset (desk, full) or l:count:c_min:c_max,...");
  auto* o_grid = app.add_option("--grid", grid, "Export grid n_radial:r_min:r_max:n_theta:n_phi");
  auto* o_out = app.add_option("--out", out, "Output directory");
  app.add_flag("--compare", compare, "Print deviations from reference binding energies");

  auto* sw = app.add_subcommand("sweep", "Run several elements and tabulate");
  std::vector<std::string> elements{"H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"};
  sw->add_option("--elements", elements, "Elements to run")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!element.empty()) cfg.element = element;
    if (o_beta->count()) cfg.scf.beta = beta;
    if (o_g0->count()) cfg.scf.g0 = g0;
    if (o_g0p->count()) cfg.scf.g0_per_pair = g0_pairs;
    if (o_tol->count()) cfg.scf.tol = tol;
    if (o_iter->count()) cfg.scf.max_iter = max_iter;
    if (o_mix->count()) cfg.scf.mixing = mixing;
    if (o_seed->count()) cfg.scf.seed = seed;
    if (o_pert->count()) cfg.scf.perturb = perturb;
    if (o_sph->count()) cfg.scf.spherical_only = true;
    if (o_and->count()) cfg.scf.anderson = true;
    if (o_basis->count()) cfg.channels = parse_basis_spec(basis);
    if (o_grid->count()) cfg.export_grid = parse_grid_spec(grid);
    if (o_out->count()) cfg.out_dir = out;

    if (*sw) {
      const auto rows = sweep(elements, cfg);
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream(cfg.out_dir + "/sweep.json") << sweep_json(rows).dump(2) << "\n";
      const std::string table = sweep_table(rows);
      std::ofstream(cfg.out_dir + "/sweep.txt") << table;
      std::cout << table;
      for (const auto& r : rows)
        if (!r.ok || !r.converged) return 2;
      return 0;
    }

    cfg.scf.Z = resolve_element(cfg.element);
    RunOutcome o;
    const int status = run(cfg, &o);
    const EnergyRow& T = o.energies.total;
    std::printf("%s  binding %.8f  F %.8f  K %.8f  iterations %d  residual %.2e  %s\n",
                element_symbol(o.Z).c_str(), o.energies.binding(), T.F, T.K, o.scf.iterations,
                o.scf.residual, o.scf.converged ? "converged" : "NOT CONVERGED");
    std::printf("ratio1 %.5f  ratio2 %.5f  (%.1f s)\n", o.ratios.ratio1, o.ratios.ratio2, o.seconds);
    if (compare) {
      const Deviation& d = o.deviation;
      std::printf("HF %.9f  dev %.6f %%   published SCFT %.7f  dev %.6f %%\n", d.hf, d.pct_dev_hf,
                  d.published, d.pct_dev_published);
    }
    if (status != 0) {
      std::fprintf(stderr, "not converged; residual history in %s/iterations.log\n", cfg.out_dir.c_str());
      for (std::size_t k = o.scf.trace.size() > 10 ? o.scf.trace.size() - 10 : 0; k < o.scf.trace.size(); ++k)
        std::fprintf(stderr, "  iter %d residual %.3e F %.10f\n", o.scf.trace[k].iter,
                     o.scf.trace[k].residual, o.scf.trace[k].F);
    }
    return status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
