#pragma once

// Counting-function asymptotics. With nu = ln kappa - 3 ln a and
// D = ln kappa / nu, the rescaled counts
//
//   sigma_k(t) = kappa^-k N(exp(k nu + t)),  t in [0, nu],
//
// converge as k grows, with |sigma_{k+1} - sigma_k| <= 2^-k in sup norm, and
// s(t) = exp(-D t) sigma(t) is the nu-periodic factor in N(lambda) ~ lambda^D s(ln lambda).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fspec/errors.hpp"
#include "fspec/shooting.hpp"

namespace fspec {

/// Period of the counting-function oscillation in ln(lambda).
template <typename Scalar>
Scalar log_period(const WeightParams<Scalar>& w) {
  return std::log(Scalar(w.kappa)) - Scalar(3) * std::log(w.a);
}

/// Spectral exponent D = ln kappa / nu.
template <typename Scalar>
Scalar spectral_exponent(const WeightParams<Scalar>& w) {
  return std::log(Scalar(w.kappa)) / log_period(w);
}

/// N(lambda) = #{n : lambda_n <= lambda}.
template <typename Scalar>
int counting_function(const SpectrumTable<Scalar>& spec, Scalar lambda) {
  if (lambda > spec.certified_up_to)
    throw CapExceeded("counting_function: lambda = " + std::to_string(double(lambda)) +
                      " beyond the certified range " + std::to_string(double(spec.certified_up_to)));
  const auto it = std::upper_bound(spec.pairs.begin(), spec.pairs.end(), lambda,
                                   [](Scalar x, const Eigenpair<Scalar>& p) { return x < p.lambda; });
  return static_cast<int>(it - spec.pairs.begin());
}

template <typename Scalar = double>
struct SigmaProfile {
  int k = 0;
  int kappa = 2;
  Scalar nu{};
  Scalar D{};
  std::vector<Scalar> t;
  std::vector<Scalar> sigma;
};

/// sigma_k on `samples` equally spaced points of [0, nu]. Needs the spectrum
/// certified up to exp((k + 1) nu).
template <typename Scalar>
SigmaProfile<Scalar> sigma_profile(const SpectrumTable<Scalar>& spec, int k, int samples) {
  if (k < 0) throw DomainError("sigma_profile: k must be >= 0");
  if (samples < 2) throw DomainError("sigma_profile: need at least 2 samples");
  SigmaProfile<Scalar> p;
  p.k = k;
  p.kappa = spec.weight.kappa;
  p.nu = log_period(spec.weight);
  p.D = spectral_exponent(spec.weight);
  const Scalar needed = std::exp(Scalar(k + 1) * p.nu);
  if (needed > spec.certified_up_to)
    throw CapExceeded("sigma_profile: k = " + std::to_string(k) + " needs the spectrum up to " +
                      std::to_string(double(needed)) + ", certified only to " +
                      std::to_string(double(spec.certified_up_to)));
  const Scalar scale = std::pow(Scalar(p.kappa), Scalar(-k));
  p.t.reserve(static_cast<std::size_t>(samples));
  p.sigma.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const Scalar t = p.nu * Scalar(i) / Scalar(samples - 1);
    const Scalar lambda = std::min(std::exp(Scalar(k) * p.nu + t), spec.certified_up_to);
    p.t.push_back(t);
    p.sigma.push_back(scale * Scalar(counting_function(spec, lambda)));
  }
  return p;
}

namespace detail {

template <typename Scalar>
void check_comparable(const SigmaProfile<Scalar>& p, const SigmaProfile<Scalar>& q) {
  if (p.t.size() != q.t.size() || p.kappa != q.kappa || p.nu != q.nu)
    throw ConfigMismatch("sigma profiles sampled on different grids");
}

}  // namespace detail

/// sup_t |sigma_q(t) - sigma_p(t)| over the shared sample points.
template <typename Scalar>
Scalar cauchy_gap(const SigmaProfile<Scalar>& p, const SigmaProfile<Scalar>& q) {
  detail::check_comparable(p, q);
  Scalar gap = 0;
  for (std::size_t i = 0; i < p.t.size(); ++i) gap = std::max(gap, std::abs(q.sigma[i] - p.sigma[i]));
  return gap;
}

/// Fraction of sample points at which the two profiles differ.
template <typename Scalar>
Scalar jump_fraction(const SigmaProfile<Scalar>& p, const SigmaProfile<Scalar>& q) {
  detail::check_comparable(p, q);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < p.t.size(); ++i) differing += p.sigma[i] != q.sigma[i] ? 1 : 0;
  return Scalar(differing) / Scalar(p.t.size());
}

/// s(t) = exp(-D t) sigma(t) on the profile's sample points.
template <typename Scalar>
std::vector<Scalar> s_profile(const SigmaProfile<Scalar>& p) {
  std::vector<Scalar> s(p.t.size());
  for (std::size_t i = 0; i < p.t.size(); ++i) s[i] = std::exp(-p.D * p.t[i]) * p.sigma[i];
  return s;
}

template <typename Scalar = double>
struct DEstimate {
  Scalar empirical{};
  Scalar analytic{};
  int points = 0;
};

/// Least-squares slope of ln N against ln lambda over the period-aligned
/// points lambda_k = exp(k nu + t0) inside the certified range. Aligning to
/// one phase removes the periodic factor, so the slope is exact once the
/// counts have settled. Needs at least three such points with N > 0.
template <typename Scalar>
DEstimate<Scalar> estimate_D(const SpectrumTable<Scalar>& spec, Scalar t0) {
  const Scalar nu = log_period(spec.weight);
  if (!(t0 >= Scalar(0) && t0 < nu)) throw DomainError("estimate_D: phase t0 must lie in [0, nu)");
  std::vector<Scalar> xs, ys;
  for (int k = 0;; ++k) {
    const Scalar log_lambda = Scalar(k) * nu + t0;
    if (std::exp(log_lambda) > spec.certified_up_to) break;
    const int count = counting_function(spec, std::exp(log_lambda));
    if (count == 0) continue;
    xs.push_back(log_lambda);
    ys.push_back(std::log(Scalar(count)));
  }
  if (xs.size() < 3)
    throw CapExceeded("estimate_D: spectrum too short; need three period-aligned points with N > 0");
  const Scalar n = Scalar(xs.size());
  Scalar mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  Scalar sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return {sxy / sxx, spectral_exponent(spec.weight), static_cast<int>(xs.size())};
}

template <typename Scalar>
DEstimate<Scalar> estimate_D(const SpectrumTable<Scalar>& spec) {
  return estimate_D(spec, log_period(spec.weight) / Scalar(2));
}

}  // namespace fspec
