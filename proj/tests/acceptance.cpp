// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fspec/asymptotics.hpp"
#include "fspec/io/archive.hpp"
#include "fspec/io/commands.hpp"
#include "fspec/measure.hpp"
#include "fspec/periodicity.hpp"
#include "oracle/reference_rk4.hpp"

using namespace fspec;

namespace {

const auto cantor = make_weight<double>(2, Rational{1, 3});
int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel(double x, double y) { return std::abs(x - y) / std::abs(y); }

struct Tables {
  SpectrumTable<double> mu02, lam06, mu126, lam10818, lam06_long;
};

double table_dev(const SpectrumTable<double>& t, int first, const std::vector<double>& ref) {
  double worst = 0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    worst = std::max(worst, rel(t.pairs.at(static_cast<std::size_t>(first) + i).lambda, ref[i]));
  return worst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  auto solve = [](double alpha, double beta, int n_max) {
    return spectrum(make_bvp(alpha, beta), cantor, SpectrumCap<double>::index(n_max));
  };
  Tables t{solve(0, 2, 4), solve(0, 6, 8), solve(12, 6, 5), solve(108, 18, 11), solve(0, 6, 15)};
  const double solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // 1. First table.
  {
    const double d1 = table_dev(t.mu02, 1, {22.131, 817.17, 3175, 38490});
    const double d2 = table_dev(t.lam06, 1, {40.965, 1195.1, 3867, 44120});
    report(1, d1 <= 1e-3 && d2 <= 1e-3 && solve_seconds <= 120,
           "max rel dev mu " + fmt("%.2e", d1) + ", lambda " + fmt("%.2e", d2) + " (tol 1e-3); solves took " +
               fmt("%.2f", solve_seconds) + " s");
  }

  // 2. Second table.
  {
    const double d1 = table_dev(t.mu126, 0, {8.2987, 137.84, 1631.1, 4380, 45860, 64650});
    const double d2 = table_dev(t.lam10818, 0, {40.965, 448.13, 3867, 7443, 62510, 88080});
    report(2, d1 <= 1e-3 && d2 <= 1e-3,
           "max rel dev mu " + fmt("%.2e", d1) + ", lambda " + fmt("%.2e", d2) + " (tol 1e-3)");
  }

  // 3. Spectral identities.
  {
    double even = 0, odd = 0;
    for (std::size_t n = 1; n <= 4; ++n) even = std::max(even, rel(t.lam06.pairs[2 * n].lambda, 54 * t.mu02.pairs[n].lambda));
    for (std::size_t n = 0; n <= 5; ++n)
      odd = std::max(odd, rel(t.lam10818.pairs[2 * n + 1].lambda, 54 * t.mu126.pairs[n].lambda));
    report(3, even <= 1e-3 && odd <= 1e-3,
           "lambda_2n vs 54 mu_n " + fmt("%.2e", even) + ", lambda_2n+1 vs 54 mu_n " + fmt("%.2e", odd) + " (tol 1e-3)");
  }

  // 4. Oscillation counts.
  {
    int checked = 0, wrong = 0;
    for (const auto* s : {&t.mu02, &t.lam06, &t.mu126, &t.lam10818, &t.lam06_long})
      for (const auto& p : s->pairs) {
        ++checked;
        wrong += p.zero_count == p.index ? 0 : 1;
      }
    report(4, wrong == 0 && t.lam06_long.pairs.size() == 16,
           std::to_string(checked) + " eigenpairs, " + std::to_string(wrong) + " with zero count != n; (0,6) to n = " +
               std::to_string(t.lam06_long.pairs.size() - 1));
  }

  // 5. Gluing.
  {
    bool ok = true;
    double bc = 0, res = 0;
    int glued = 0;
    auto check = [&](const Eigenpair<double>& src, GlueMode mode, const BVPConfig<double>& big, int zeros) {
      try {
        const auto g = glue(cantor, src, mode);
        bc = std::max(bc, glued_boundary_residual(big, g));
        res = std::max(res, glued_residual(cantor, g));
        ok = ok && g.zero_count == zeros;
        ++glued;
      } catch (const std::exception& e) {
        std::printf("  glue failed: %s\n", e.what());
        ok = false;
      }
    };
    const auto quad = periodicity_configs(cantor, GlueMode::kQuadratic).first;
    const auto cub = periodicity_configs(cantor, GlueMode::kCubic).first;
    for (int n = 1; n <= 4; ++n) check(t.mu02.pairs[static_cast<std::size_t>(n)], GlueMode::kQuadratic, quad, 2 * n);
    for (int n = 0; n <= 5; ++n) check(t.mu126.pairs[static_cast<std::size_t>(n)], GlueMode::kCubic, cub, 2 * n + 1);
    ok = ok && bc <= 1e-6 && res <= 1e-4;
    report(5, ok,
           std::to_string(glued) + " glued functions; max BC residual " + fmt("%.2e", bc) + " (tol 1e-6), max equation residual " +
               fmt("%.2e", res) + " (tol 1e-4)");
  }

  // 6. Measure invariants.
  {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double self = 0, sym = 0, gap = 0;
    for (int i = 0; i < 10000; ++i) {
      const double x = u(rng), p = p_eval(cantor, x);
      self = std::max(self, std::abs(p_eval(cantor, x / 3) - p / 2));
      self = std::max(self, std::abs(p_eval(cantor, std::min(1.0, 2.0 / 3 + x / 3)) - (1 + p) / 2));
      sym = std::max(sym, std::abs(p_eval(cantor, 1 - x) - (1 - p)));
    }
    const auto d = decompose(cantor, 10);
    std::uniform_int_distribution<std::size_t> pick(0, d.gaps.size() - 1);
    for (int i = 0; i < 10000; ++i) {
      const auto& g = d.gaps[pick(rng)];
      gap = std::max(gap, std::abs(p_eval(cantor, g.lo + (0.001 + 0.998 * u(rng)) * (g.hi - g.lo)) - g.p_value));
    }
    const double m0 = stieltjes_integral(cantor, [](double) { return 1.0; }, 12);
    const double m1 = stieltjes_integral(cantor, [](double x) { return x; }, 12);
    const double m2 = stieltjes_integral(cantor, [](double x) { return x * x; }, 12);
    report(6, self <= 1e-12 && sym <= 1e-12 && gap <= 1e-12 && m0 == 1.0 && std::abs(m1 - 0.5) <= 1e-3 && std::abs(m2 - 0.375) <= 1e-3,
           "self-similarity " + fmt("%.1e", self) + ", symmetry " + fmt("%.1e", sym) + ", gaps " + fmt("%.1e", gap) +
               "; moments " + fmt("%.17g", m0) + ", " + fmt("%.6f", m1) + ", " + fmt("%.6f", m2));
  }

  // 7. Integrator invariants.
  {
    const auto g = build_grid(cantor, 10, 4);
    double det = 0;
    for (double lambda : {1.0, 1e2, 1e4}) det = std::max(det, std::abs(fundamental_determinant(cantor, lambda, *g) - 1));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> node(0, g->size() - 2);
    int bad = 0;
    for (int draw = 0; draw < 100; ++draw) {
      const double lambda = std::pow(10.0, 4 * u(rng));
      const Eigen::Vector4d c(u(rng), u(rng), u(rng), u(rng));
      const std::size_t i0 = node(rng);
      Eigen::Vector4d s = c;
      s(3) -= lambda * g->p_nodes[i0] * c(0);
      for (std::size_t i = i0; i < g->intervals(); ++i) detail::advance(*g, i, lambda, s);
      const Eigen::Vector4d end(s(0), s(1), s(2), s(3) + lambda * s(0));
      bad += (end.array() > 0).all() ? 0 : 1;

      const std::size_t j0 = node(rng) + 1;
      Eigen::Vector4d m(c(0), -c(1), c(2), -c(3));
      m(3) -= lambda * g->p_nodes[j0] * m(0);
      const Eigen::Vector4d at0 = oracle::rk4_between(cantor, *g, lambda, m, j0, 0);
      bad += at0(0) > 0 && at0(1) < 0 && at0(2) > 0 && at0(3) < 0 ? 0 : 1;
    }
    report(7, det <= 1e-6 && bad == 0,
           "max |det - 1| " + fmt("%.2e", det) + " (tol 1e-6); positivity failures " + std::to_string(bad) +
               " of 200 (forward and mirror)");
  }

  // 8. Asymptotics. The k = 2 comparison needs sigma_3, i.e. the spectrum up
  // to 54^4 ~ 8.5e6, so the Cauchy bound runs on a spectrum certified to 1e7.
  {
    const auto base = spectrum(make_bvp(0.0, 2.0), cantor, SpectrumCap<double>::lambda(5e5));
    const auto wide = spectrum(make_bvp(0.0, 2.0), cantor, SpectrumCap<double>::lambda(1e7));
    bool bound = true;
    std::string gaps;
    std::vector<SigmaProfile<double>> p;
    for (int k = 0; k <= 3; ++k) p.push_back(sigma_profile(wide, k, 1001));
    for (int k = 0; k < 3; ++k) {
      const double g = cauchy_gap(p[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k + 1)]);
      bound = bound && g <= std::ldexp(1.0, -k);
      gaps += (k ? ", " : "") + fmt("%.4g", g);
    }
    const auto d = estimate_D(base);
    const bool analytic = std::abs(d.analytic - 0.173765) <= 1e-6;
    const bool empirical = std::abs(d.empirical / d.analytic - 1) <= 0.05;
    report(8, bound && analytic && empirical,
           "sup gaps k=0..2: " + gaps + " (bounds 1, 0.5, 0.25); D analytic " + fmt("%.8f", d.analytic) +
               ", empirical " + fmt("%.6f", d.empirical) + " from " + std::to_string(d.points) + " points");
  }

  // 9. Determinism and archive round trip.
  {
    const auto dir = std::filesystem::temp_directory_path() / "fspec_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    io::RunConfig cfg;
    cfg.n_max = 8;
    std::ostringstream sink;
    bool ok = true;
    std::string detail;
    try {
      cfg.out = (dir / "first.json").string();
      ok = ok && io::cmd_solve(cfg, sink) == io::kOk;
      cfg.out = (dir / "second.json").string();
      ok = ok && io::cmd_solve(cfg, sink) == io::kOk;
      const bool identical = slurp(dir / "first.json") == slurp(dir / "second.json");
      const auto rebuilt = io::recertify(io::read_archive((dir / "first.json").string()));
      ok = ok && identical && rebuilt.pairs.size() == 9;
      detail = std::string(identical ? "archives byte-identical" : "archives differ") + "; reload re-certified " +
               std::to_string(rebuilt.pairs.size()) + " eigenpairs";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(9, ok, detail);
  }

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
