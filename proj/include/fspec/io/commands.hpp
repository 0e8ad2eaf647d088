#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "fspec/io/run_config.hpp"
#include "fspec/periodicity.hpp"

namespace fspec::io {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverFailure = 3, kCapError = 4 };

/// Maps the library's exceptions onto process exit codes.
int exit_code_for(const std::exception& e);

/// Runs `body`, printing any exception to `err` and translating it.
int guarded(const std::function<int()>& body, std::ostream& err);

/// Solves `cfg`, writes the archive to cfg.out (or spectrum-<digest>.json)
/// and prints the eigenvalue table. Returns the archive path via `archive_path`.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::string* archive_path = nullptr);

/// Two related problems on one weight. `base` carries the weight, solver
/// knobs and the small-problem index cap n_max; boundary data default to the
/// pair the mode prescribes and may be overridden.
struct PairConfig {
  RunConfig base;
  GlueMode mode = GlueMode::kQuadratic;
  std::optional<double> small_alpha, small_beta, big_alpha, big_beta;
  /// Previously written archives to use instead of solving.
  std::optional<std::string> small_archive, big_archive;
};

/// Writes the identity comparison as CSV to base.out (stdout if empty).
int cmd_tables(const PairConfig& pair, std::ostream& out);

/// Runs the identity check and the gluing checks; writes a JSON report to
/// base.out (stdout if empty).
int cmd_periodicity(const PairConfig& pair, std::ostream& out);

struct CountingConfig {
  RunConfig base;  // needs lambda_max unless an archive is given
  std::optional<std::string> archive;
  int k_max = 3;
  int samples = 1001;
  /// Output directory.
  std::string out_dir = ".";
};

/// Writes counting.csv, sigma.csv, s_profile_k<k>.csv, d_estimate.csv and
/// counting_summary.json into out_dir.
int cmd_counting(const CountingConfig& cfg, std::ostream& out);

}  // namespace fspec::io
