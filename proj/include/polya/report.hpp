#pragma once

// Independent oracles and empirical validation of the universal law
// t(n) ~ C rho^{-n} n^{-3/2} on the support class.

#include <cmath>
#include <string>
#include <vector>

#include "polya/fixpoint.hpp"
#include "polya/periodicity.hpp"
#include "polya/series.hpp"
#include "polya/singularity.hpp"

namespace polya {

// Rooted-tree counts via the Euler-product recurrence
//   t(1) = 1,  n t(n+1) = sum_{k=1..n} (sum_{d|k} d t(d)) t(n-k+1),
// used only as a cross-check oracle against the fixpoint of z + z MSet(w).
inline IntSeries euler_product_prefix(int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "order must be >= 1");
  std::vector<Rat> t(static_cast<size_t>(order) + 1);
  std::vector<Rat> sigma(static_cast<size_t>(order) + 1);  // sum_{d|k} d t(d)
  t[1] = 1;
  for (int n = 1; n < order; ++n) {
    for (int mult = n; mult <= order; mult += n) sigma[static_cast<size_t>(mult)] += Rat(n) * t[static_cast<size_t>(n)];
    Rat acc(0);
    for (int k = 1; k <= n; ++k) acc += sigma[static_cast<size_t>(k)] * t[static_cast<size_t>(n - k + 1)];
    t[static_cast<size_t>(n + 1)] = acc / n;
  }
  Series s(order);
  for (int n = 1; n <= order; ++n) s.set(n, t[static_cast<size_t>(n)]);
  return IntSeries(std::move(s));
}

// Catalan-shift counts via the ballot recurrence c(n+1) = sum c(k) c(n+1-k).
inline IntSeries catalan_prefix(int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "order must be >= 1");
  std::vector<Rat> c(static_cast<size_t>(order) + 1);
  c[1] = 1;
  for (int n = 2; n <= order; ++n) {
    Rat acc(0);
    for (int k = 1; k < n; ++k) acc += c[static_cast<size_t>(k)] * c[static_cast<size_t>(n - k)];
    c[static_cast<size_t>(n)] = acc;
  }
  Series s(order);
  for (int n = 1; n <= order; ++n) s.set(n, c[static_cast<size_t>(n)]);
  return IntSeries(std::move(s));
}

struct FitReport {
  std::vector<std::pair<long, double>> samples;  // (n, t(n) rho^n n^{3/2}) on the support
  double tail_mean = 0.0;                        // mean over the last 20% of support points
  double relative_deviation = 0.0;               // |tail_mean - C| / C
  bool pass = false;
};

// Rescales the support coefficients by rho^n n^{3/2}; if the universal law
// holds the samples flatten out at C. Computed in log space so huge exact
// coefficients stay representable.
inline FitReport empirical_fit(const SolutionPrefix& sol, const AsymptoticLaw& law,
                               double threshold = 0.05) {
  const Series& s = sol.series;
  FitReport fit;
  double log_rho = std::log(law.rho);
  for (int n = 1; n <= s.order(); ++n) {
    if (is_zero(s.at(n))) continue;
    if ((n - law.d) % law.q != 0) continue;
    double v = std::exp(log_rat(s.at(n)) + static_cast<double>(n) * log_rho +
                        1.5 * std::log(static_cast<double>(n)));
    fit.samples.emplace_back(n, v);
  }
  if (fit.samples.size() < 50)
    throw Error(ErrorKind::InsufficientSupportPoints,
                "empirical fit needs at least 50 support points, have " +
                    std::to_string(fit.samples.size()));
  size_t tail_start = fit.samples.size() - fit.samples.size() / 5;
  double acc = 0.0;
  for (size_t i = tail_start; i < fit.samples.size(); ++i) acc += fit.samples[i].second;
  fit.tail_mean = acc / static_cast<double>(fit.samples.size() - tail_start);
  fit.relative_deviation = std::fabs(fit.tail_mean - law.C) / law.C;
  fit.pass = fit.relative_deviation <= threshold;
  return fit;
}

// Trailing-coefficient growth (t(n)/t(n-q))^{1/q}, averaged over the last
// support stretch: an independent estimate of 1/rho to hold against the
// solver's value.
inline double ratio_rho_estimate(const SolutionPrefix& sol, const PeriodInfo& p) {
  const Series& s = sol.series;
  std::vector<int> support;
  for (int n = 1; n <= s.order(); ++n)
    if (!is_zero(s.at(n))) support.push_back(n);
  if (support.size() < 50)
    throw Error(ErrorKind::InsufficientSupportPoints,
                "ratio estimate needs at least 50 support points, have " +
                    std::to_string(support.size()));
  size_t window = std::min<size_t>(100, support.size() / 2);
  long q = std::max<long>(1, p.q);
  double acc = 0.0;
  size_t count = 0;
  for (size_t i = support.size() - window; i < support.size(); ++i) {
    int n = support[i];
    if (n - q < 1 || is_zero(s.at(n - static_cast<int>(q)))) continue;
    acc += std::exp((log_rat(s.at(n)) - log_rat(s.at(n - static_cast<int>(q)))) /
                    static_cast<double>(q));
    ++count;
  }
  if (count == 0)
    throw Error(ErrorKind::InsufficientSupportPoints, "no q-spaced support pairs");
  return acc / static_cast<double>(count);
}

// Exact semantic probe for nonlinearity: the second forward difference
//   Theta(S + 2a) - 2 Theta(S + a) + Theta(S)
// vanishes identically iff the representative is linear in w (every term is
// coefficientwise convex in the perturbation, so no cancellation can hide a
// nonzero part). Used as the oracle against the syntactic classifier.
inline bool probe_nonlinear_semantic(const TermPtr& t, int order = 24) {
  Series base(order);
  for (int n = 1; n <= order; ++n) base.set(n, Rat(1));
  Series bump = monomial(1, 1, order);
  Series s0 = apply_operator(t, base);
  Series s1 = apply_operator(t, add(base, bump));
  Series s2 = apply_operator(t, add(base, add(bump, bump)));
  for (int n = 1; n <= order; ++n) {
    Rat d2 = s2.at(n) + s0.at(n) - 2 * s1.at(n);
    if (!is_zero(d2)) return true;
  }
  return false;
}

}  // namespace polya
