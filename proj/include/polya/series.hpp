#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polya/rational.hpp"

namespace polya {

// Truncated formal power series with exact nonnegative rational coefficients
// and constant term 0 (the solution space every operator acts on). The
// truncation order N is explicit; operations propagate it as a min and never
// fabricate coefficients beyond it.
class Series {
 public:
  explicit Series(int order) : order_(order), c_(static_cast<size_t>(order) + 1) {
    if (order < 1) throw Error(ErrorKind::InvalidArgument, "series order must be >= 1");
  }

  static Series from_coeffs(std::vector<Rat> coeffs_from_1, int order) {
    Series s(order);
    for (size_t i = 0; i < coeffs_from_1.size() && i < static_cast<size_t>(order); ++i)
      s.set(static_cast<int>(i) + 1, std::move(coeffs_from_1[i]));
    return s;
  }

  int order() const { return order_; }

  const Rat& at(int n) const {
    if (n < 0 || n > order_) throw Error(ErrorKind::InvalidArgument, "coefficient index out of range");
    return c_[static_cast<size_t>(n)];
  }

  // n >= 1; negative values are a hard error (DOM discipline).
  void set(int n, Rat v) {
    if (n < 1 || n > order_) throw Error(ErrorKind::InvalidArgument, "coefficient index out of range");
    if (is_negative(v))
      throw Error(ErrorKind::NegativeCoefficient, "coefficient " + std::to_string(n) + " is negative");
    c_[static_cast<size_t>(n)] = std::move(v);
  }

  bool is_zero_series() const {
    for (int n = 1; n <= order_; ++n)
      if (!is_zero(c_[static_cast<size_t>(n)])) return false;
    return true;
  }

  int first_nonzero() const {  // 0 when identically zero
    for (int n = 1; n <= order_; ++n)
      if (!is_zero(c_[static_cast<size_t>(n)])) return n;
    return 0;
  }

  bool operator==(const Series& o) const = default;

 private:
  int order_;
  std::vector<Rat> c_;
};

// Integer-coefficient view: same layout, integrality checked on construction.
struct IntSeries {
  Series series;

  explicit IntSeries(Series s) : series(std::move(s)) {
    for (int n = 1; n <= series.order(); ++n)
      if (!is_integer(series.at(n)))
        throw Error(ErrorKind::InvalidArgument,
                    "coefficient " + std::to_string(n) + " is not an integer");
  }
};

inline bool is_integral_series(const Series& a) {
  for (int n = 1; n <= a.order(); ++n)
    if (!is_integer(a.at(n))) return false;
  return true;
}

inline Series zero_series(int order) { return Series(order); }

inline Series monomial(int n, Rat c, int order) {
  Series s(order);
  if (n <= order) s.set(n, std::move(c));
  return s;
}

inline Series add(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  Series r(n);
  for (int k = 1; k <= n; ++k) r.set(k, a.at(k) + b.at(k));
  return r;
}

// Cauchy product, schoolbook convolution. Both inputs have valuation >= 1 so
// the result does too.
inline Series mul(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  Series r(n);
  for (int i = 1; i < n; ++i) {
    if (is_zero(a.at(i))) continue;
    for (int j = 1; i + j <= n; ++j) {
      if (is_zero(b.at(j))) continue;
      r.set(i + j, r.at(i + j) + a.at(i) * b.at(j));
    }
  }
  return r;
}

inline Series scale(const Rat& c, const Series& a) {
  if (is_negative(c)) throw Error(ErrorKind::NegativeCoefficient, "negative scalar");
  Series r(a.order());
  for (int k = 1; k <= a.order(); ++k) r.set(k, c * a.at(k));
  return r;
}

// a(b(z)), well-defined because b has constant term 0. Horner in b:
// (((a_N)b + a_{N-1})b + ... + a_1)b, carried as a raw vector because the
// intermediate values have constant terms.
inline Series compose(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  std::vector<Rat> cur(static_cast<size_t>(n) + 1);
  for (int k = n; k >= 1; --k) {
    cur[0] += a.at(k);
    std::vector<Rat> next(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      if (is_zero(cur[static_cast<size_t>(i)])) continue;
      for (int j = 1; i + j <= n; ++j) {
        if (is_zero(b.at(j))) continue;
        next[static_cast<size_t>(i + j)] += cur[static_cast<size_t>(i)] * b.at(j);
      }
    }
    cur = std::move(next);
  }
  Series r(n);
  for (int m = 1; m <= n; ++m)
    if (!is_zero(cur[static_cast<size_t>(m)])) r.set(m, cur[static_cast<size_t>(m)]);
  return r;
}

// Plethysm substitution z -> z^k: coefficient at n*k equals a(n).
inline Series substitute_power(const Series& a, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "substitute_power needs k >= 1");
  Series r(a.order());
  for (int n = 1; n * k <= a.order() && n <= a.order(); ++n) r.set(n * k, a.at(n));
  return r;
}

// Termwise d/dz. The result generally has a nonzero constant term, so it is
// returned as a raw coefficient vector (index = power of z) rather than a
// Series; the singularity module consumes it directly.
inline std::vector<Rat> derivative(const Series& a) {
  std::vector<Rat> d(static_cast<size_t>(a.order()));
  for (int n = 1; n <= a.order(); ++n) d[static_cast<size_t>(n - 1)] = Rat(n) * a.at(n);
  return d;
}

// Coefficientwise dominance a <= b.
inline bool dominates(const Series& small, const Series& big) {
  int n = std::min(small.order(), big.order());
  for (int k = 1; k <= n; ++k)
    if (small.at(k) > big.at(k)) return false;
  return true;
}

struct EvalResult {
  double value = 0.0;
  double tail_bound = 0.0;  // +inf signals non-convergence evidence
};

namespace detail {

// Empirical growth ratio from the trailing support points of the prefix.
// Returns 0 when the window looks polynomial (no growth data).
inline double growth_ratio_estimate(const Series& a) {
  int n = a.order();
  int window_start = n - n / 4 + 1;
  std::vector<int> support;
  for (int k = 1; k <= n; ++k)
    if (!is_zero(a.at(k))) support.push_back(k);
  if (support.size() < 2) return 0.0;
  if (support.back() < window_start) return 0.0;  // trailing quarter is zero: polynomial evidence
  double best = 0.0;
  bool found = false;
  for (size_t i = 1; i < support.size(); ++i) {
    if (support[i] < window_start) continue;
    int gap = support[i] - support[i - 1];
    double step = std::exp((log_rat(a.at(support[i])) - log_rat(a.at(support[i - 1]))) /
                           static_cast<double>(gap));
    best = std::max(best, step);
    found = true;
  }
  if (!found) {
    // no two support points in the last quarter: fall back to the last pair
    size_t m = support.size();
    int gap = support[m - 1] - support[m - 2];
    best = std::exp((log_rat(a.at(support[m - 1])) - log_rat(a.at(support[m - 2]))) /
                    static_cast<double>(gap));
  }
  return best;
}

}  // namespace detail

// Numeric evaluation of the prefix at x in [0,1) with a declared geometric
// tail estimate: the growth ratio r comes from the trailing quarter of the
// coefficients, inflated by a 1.25 safety factor. tail_bound == +inf means
// the prefix gives evidence of non-convergence at x (r*x >= 1), i.e. the
// order is insufficient -- not a divergence proof.
inline EvalResult eval_real(const Series& a, double x,
                            std::optional<double> tail_ratio_hint = std::nullopt) {
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "eval_real needs x >= 0");
  if (a.order() < 8) throw Error(ErrorKind::InvalidArgument, "eval_real needs order >= 8");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  EvalResult res;
  if (x == 0.0) return res;
  double log_x = std::log(x);
  for (int n = 1; n <= a.order(); ++n) {
    if (is_zero(a.at(n))) continue;
    res.value += scaled_term(a.at(n), log_x, n);
  }

  double r = tail_ratio_hint ? *tail_ratio_hint : 1.25 * detail::growth_ratio_estimate(a);
  if (r == 0.0) {
    res.tail_bound = 0.0;  // polynomial evidence: no tail
    return res;
  }
  if (r * x >= 1.0) {
    res.tail_bound = kInf;
    return res;
  }
  // magnitude extrapolated to index N from the last support point
  int last = 0;
  for (int k = a.order(); k >= 1; --k)
    if (!is_zero(a.at(k))) { last = k; break; }
  if (last == 0) { res.tail_bound = 0.0; return res; }
  double log_ext = log_rat(a.at(last)) + static_cast<double>(a.order() - last) * std::log(r);
  double log_tail = log_ext + std::log(r) + static_cast<double>(a.order() + 1) * log_x -
                    std::log1p(-r * x);
  res.tail_bound = log_tail > 700.0 ? kInf : std::exp(log_tail);
  return res;
}

// Sum of a raw coefficient vector (index = power, constant term allowed).
inline double eval_raw(const std::vector<Rat>& c, double x) {
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "eval_raw needs x >= 0");
  double acc = c.empty() ? 0.0 : to_double(c[0]);
  if (x == 0.0) return acc;
  double log_x = std::log(x);
  for (size_t n = 1; n < c.size(); ++n) {
    if (is_zero(c[n])) continue;
    acc += scaled_term(c[n], log_x, static_cast<long>(n));
  }
  return acc;
}

inline std::string to_string(const Series& a) {
  std::string out;
  bool first = true;
  for (int n = 1; n <= a.order(); ++n) {
    if (is_zero(a.at(n))) continue;
    if (!first) out += " + ";
    first = false;
    if (a.at(n) != 1) out += rat_string(a.at(n)) + "*";
    out += "z";
    if (n > 1) out += "^" + std::to_string(n);
  }
  return first ? "0" : out;
}

}  // namespace polya
