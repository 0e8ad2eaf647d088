#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fspec/io/commands.hpp"

namespace {

using fspec::io::RunConfig;

struct Shared {
  RunConfig cfg;
  std::string a_text = "1/3";
  std::optional<int> n_max;
  std::optional<double> lambda_max;
};

void add_weight_and_solver(CLI::App* app, Shared& s) {
  app->add_option("--kappa", s.cfg.kappa, "number of cells per generation")->capture_default_str();
  app->add_option("--a", s.a_text, "copy scale, e.g. 1/3")->capture_default_str();
  app->add_option("--grid-gen", s.cfg.grid_generation, "grid generation")->capture_default_str();
  app->add_option("--substeps", s.cfg.substeps, "RK4 steps per cell and per gap")->capture_default_str();
  app->add_option("--scan-ratio", s.cfg.scan_ratio, "geometric scan ratio")->capture_default_str();
  app->add_option("--tol", s.cfg.tol, "relative eigenvalue tolerance")->capture_default_str();
  app->add_option("--lambda-min", s.cfg.lambda_min, "scan start")->capture_default_str();
  app->add_option("--out", s.cfg.out, "output path");
}

void add_boundary(CLI::App* app, Shared& s) {
  app->add_option("--alpha", s.cfg.alpha, "boundary parameter alpha")->capture_default_str();
  app->add_option("--beta", s.cfg.beta, "boundary parameter beta")->capture_default_str();
}

void add_caps(CLI::App* app, Shared& s) {
  app->add_option("--n-max", s.n_max, "largest eigenvalue index");
  app->add_option("--lambda-max", s.lambda_max, "largest eigenvalue");
}

RunConfig finish(const Shared& s) {
  RunConfig c = s.cfg;
  c.a = fspec::io::parse_scale(s.a_text);
  c.n_max = s.n_max;
  c.lambda_max = s.lambda_max;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of y'''' = lambda rho y with a self-similar singular weight"};
  app.require_subcommand(1);

  Shared solve_opts;
  auto* solve = app.add_subcommand("solve", "solve one boundary problem and write a spectrum archive");
  add_weight_and_solver(solve, solve_opts);
  add_boundary(solve, solve_opts);
  add_caps(solve, solve_opts);

  Shared pair_opts;
  std::string mode_text = "quadratic";
  std::optional<double> small_alpha, small_beta, big_alpha, big_beta;
  std::optional<std::string> small_archive, big_archive;
  auto add_pair = [&](CLI::App* sub) {
    add_weight_and_solver(sub, pair_opts);
    sub->add_option("--n-max", pair_opts.n_max, "largest small-problem index")->required();
    sub->add_option("--mode", mode_text, "quadratic or cubic")
        ->check(CLI::IsMember({"quadratic", "cubic"}))
        ->capture_default_str();
    sub->add_option("--small-alpha", small_alpha);
    sub->add_option("--small-beta", small_beta);
    sub->add_option("--big-alpha", big_alpha);
    sub->add_option("--big-beta", big_beta);
    sub->add_option("--small-archive", small_archive, "use a stored small spectrum");
    sub->add_option("--big-archive", big_archive, "use a stored big spectrum");
  };
  auto* tables = app.add_subcommand("tables", "compare two related spectra (CSV)");
  add_pair(tables);
  auto* periodicity = app.add_subcommand("periodicity", "identity and gluing report (JSON)");
  add_pair(periodicity);

  Shared count_opts;
  fspec::io::CountingConfig counting_cfg;
  std::optional<std::string> counting_archive;
  auto* counting = app.add_subcommand("counting", "counting function, sigma and s profiles, D estimate");
  add_weight_and_solver(counting, count_opts);
  add_boundary(counting, count_opts);
  add_caps(counting, count_opts);
  counting->add_option("--archive", counting_archive, "use a stored spectrum");
  counting->add_option("--k-max", counting_cfg.k_max, "largest period index")->capture_default_str();
  counting->add_option("--samples", counting_cfg.samples, "t samples per period")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fspec::io::kConfigError;
  }

  return fspec::io::guarded(
      [&]() -> int {
        if (*solve) return fspec::io::cmd_solve(finish(solve_opts), std::cout);
        if (*tables || *periodicity) {
          fspec::io::PairConfig p;
          p.base = finish(pair_opts);
          p.mode = mode_text == "cubic" ? fspec::GlueMode::kCubic : fspec::GlueMode::kQuadratic;
          p.small_alpha = small_alpha;
          p.small_beta = small_beta;
          p.big_alpha = big_alpha;
          p.big_beta = big_beta;
          p.small_archive = small_archive;
          p.big_archive = big_archive;
          return *tables ? fspec::io::cmd_tables(p, std::cout) : fspec::io::cmd_periodicity(p, std::cout);
        }
        counting_cfg.base = finish(count_opts);
        if (!counting_cfg.base.n_max && !counting_cfg.base.lambda_max && !counting_archive)
          counting_cfg.base.lambda_max = 1e7;
        counting_cfg.archive = counting_archive;
        if (!counting_cfg.base.out.empty()) counting_cfg.out_dir = counting_cfg.base.out;
        return fspec::io::cmd_counting(counting_cfg, std::cout);
      },
      std::cerr);
}
