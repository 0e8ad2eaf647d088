#include "fspec/io/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "fspec/errors.hpp"

namespace fspec::io {

WeightParams<double> RunConfig::weight() const { return make_weight<double>(kappa, a); }

BVPConfig<double> RunConfig::boundary() const { return make_bvp(alpha, beta); }

SolverOptions<double> RunConfig::solver() const {
  SolverOptions<double> o;
  o.grid_generation = grid_generation;
  o.substeps = substeps;
  o.scan_ratio = scan_ratio;
  o.tol = tol;
  o.lambda_min = lambda_min;
  o.renorm_every = static_cast<std::size_t>(renorm_every);
  return o;
}

SpectrumCap<double> RunConfig::cap() const {
  if (n_max) return SpectrumCap<double>::index(*n_max);
  return SpectrumCap<double>::lambda(*lambda_max);
}

void RunConfig::validate() const {
  weight();
  boundary();
  if (grid_generation < 1 || grid_generation > 20) throw DomainError("grid generation must lie in [1, 20]");
  if (substeps < 1 || substeps > 64) throw DomainError("substeps must lie in [1, 64]");
  if (!(scan_ratio > 1.0 && scan_ratio <= 4.0)) throw DomainError("scan ratio must lie in (1, 4]");
  if (!(tol > 0.0 && tol < 1e-2)) throw DomainError("tol must lie in (0, 1e-2)");
  if (!(lambda_min > 0.0)) throw DomainError("lambda_min must be positive");
  if (renorm_every < 1) throw DomainError("renormalization interval must be >= 1");
  if (n_max.has_value() == lambda_max.has_value()) throw DomainError("give exactly one of --n-max and --lambda-max");
  if (n_max && *n_max < 0) throw DomainError("--n-max must be >= 0");
  if (lambda_max && !(std::isfinite(*lambda_max) && *lambda_max > 0.0))
    throw DomainError("--lambda-max must be positive and finite");
}

Rational parse_scale(const std::string& text) {
  const auto r = parse_rational(text);
  if (!r) throw DomainError("cannot parse copy scale '" + text + "' as an exact rational");
  return *r;
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string digest(const RunConfig& cfg) {
  std::string canon = "kappa=" + std::to_string(cfg.kappa) + ";a=" + to_string(cfg.a) +
                      ";alpha=" + format_number(cfg.alpha) + ";beta=" + format_number(cfg.beta) +
                      ";grid=" + std::to_string(cfg.grid_generation) + ";substeps=" + std::to_string(cfg.substeps) +
                      ";scan=" + format_number(cfg.scan_ratio) + ";tol=" + format_number(cfg.tol) +
                      ";lambda_min=" + format_number(cfg.lambda_min) + ";renorm=" + std::to_string(cfg.renorm_every);
  if (cfg.n_max) canon += ";n_max=" + std::to_string(*cfg.n_max);
  if (cfg.lambda_max) canon += ";lambda_max=" + format_number(*cfg.lambda_max);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace fspec::io
