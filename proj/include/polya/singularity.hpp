#pragma once

// Numeric solution of the characteristic system E(rho, tau) = tau,
// E_w(rho, tau) = 1 for the representative of Theta at the solution T, and
// the Main-Theorem asymptotic constant. The representative is evaluated as a
// second-order jet directly over the AST; plethysm terms U(x^k) are frozen
// constants computed from the exact prefix.

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "polya/fixpoint.hpp"
#include "polya/jet.hpp"
#include "polya/periodicity.hpp"
#include "polya/series.hpp"

namespace polya {

struct CharSolution {
  double rho = 0.0;
  double tau = 0.0;
  double Ez = 0.0;
  double Eww = 0.0;
  double resid_value = 0.0;  // |tau - E(rho, tau)|
  double resid_deriv = 0.0;  // |1 - E_w(rho, tau)|
  double rho_error = 0.0;    // propagated estimate (bisection + tails)
  double tail_error = 0.0;   // accumulated series-tail bounds at the point
};

struct AsymptoticLaw {
  double C = 0.0;
  double rho = 0.0;
  long d = 0;
  long q = 1;
  std::string support;  // congruence-class description
};

struct JetSettings {
  int m_max = 400;          // truncation of infinite member sums
  double inner_tol = 1e-13; // inner fixpoint convergence
};

// Equation prepared for repeated jet evaluation: the tape engine holds the
// exact series of every subterm at T, which is where the frozen plethysm
// constants U(x^k), U'(x^k) come from.
class PreparedEquation {
 public:
  PreparedEquation(TermPtr term, const SolutionPrefix& sol, JetSettings settings = {})
      : term_(std::move(term)), order_(sol.order), settings_(settings),
        engine_(term_, sol.order) {
    engine_.apply(sol.series);  // extends every tape to full order
    prefix_ = &sol.series;
  }

  int order() const { return order_; }
  const Series& prefix() const { return *prefix_; }

  struct Result {
    Jet2 jet;
    double tail_err = 0.0;
  };

  // pre: 0 < x < 1 when plethysm is present; y >= 0
  Result eval(double x, double y) const {
    if (x < 0.0 || y < 0.0)
      throw Error(ErrorKind::InvalidArgument, "eval_jet needs x >= 0 and y >= 0");
    Ctx ctx{x, y, 0.0};
    Jet2 j = eval_node(term_, engine_.w_env(), Jet2::var_w(y), ctx);
    return {j, ctx.tail_err};
  }

 private:
  struct Ctx {
    double x;
    double y;
    mutable double tail_err;
  };

  struct SeriesData {
    Series series;
    std::vector<Rat> deriv;
    double growth_ratio;  // uninflated trailing-coefficient growth, as tail hint
    explicit SeriesData(Series s)
        : series(std::move(s)), deriv(derivative(series)),
          growth_ratio(detail::growth_ratio_estimate(series)) {}
  };

  const SeriesData& series_of(detail::TapeNode* tape) const {
    auto it = series_cache_.find(tape);
    if (it != series_cache_.end()) return it->second;
    Series s(order_);
    for (int n = 1; n <= order_; ++n) {
      const Rat& c = tape->coeff(n);
      if (!is_zero(c)) s.set(n, c);
    }
    return series_cache_.emplace(tape, SeriesData(std::move(s))).first->second;
  }

  // Frozen plethysm constant (U(x^k), d/dx U(x^k)) with its tail bound. The
  // uninflated growth ratio is passed as the tail hint: x^k sits well inside
  // the radius, where the default 1.25 safety inflation would falsely signal
  // divergence for rho close to 1.
  Jet2 pleth_const(const SeriesData& u, double x, int k, const Ctx& ctx) const {
    double xk = std::pow(x, k);
    EvalResult ev = eval_real(u.series, xk, u.growth_ratio > 0.0
                                               ? std::optional<double>(u.growth_ratio)
                                               : std::nullopt);
    if (std::isinf(ev.tail_bound))
      throw Error(ErrorKind::DivergentEvaluation,
                  "plethysm constant U(x^" + std::to_string(k) + ") does not converge");
    ctx.tail_err += ev.tail_bound;
    double du = eval_raw(u.deriv, xk);
    double dxk = static_cast<double>(k) * std::pow(x, k - 1);
    return Jet2::constant(ev.value, dxk * du);
  }

  // sum of weight(m) * base^{exp(m)} over listed terms (ascending exponents);
  // `truncated` marks an infinite set cut at m_max.
  Jet2 powers_sum(const std::vector<std::pair<long, double>>& terms, bool truncated,
                  const Jet2& base, const Ctx& ctx) const {
    Jet2 acc;
    if (terms.empty()) return acc;
    if (truncated && base.v >= 1.0)
      throw Error(ErrorKind::DivergentEvaluation, "member sum diverges (base >= 1)");
    Jet2 cur = jet_pow(base, terms.front().first);
    long cur_exp = terms.front().first;
    double scale_acc = 0.0;
    double last_term = 0.0;
    bool converged = false;
    for (size_t i = 0; i < terms.size(); ++i) {
      if (i) {
        long gap = terms[i].first - cur_exp;
        cur = cur * jet_pow(base, gap);
        cur_exp = terms[i].first;
      }
      Jet2 term = terms[i].second * cur;
      acc += term;
      double ts = std::fabs(term.v) + std::fabs(term.dz) + std::fabs(term.dw) + std::fabs(term.dww);
      scale_acc = std::max(scale_acc,
                           std::fabs(acc.v) + std::fabs(acc.dz) + std::fabs(acc.dw) + std::fabs(acc.dww));
      last_term = ts;
      if (ts <= 1e-18 * (scale_acc + 1e-300)) { converged = true; break; }
    }
    if (truncated && !converged) {
      double r = base.v;
      if (r >= 1.0) throw Error(ErrorKind::DivergentEvaluation, "member sum diverges");
      if (r >= 0.9)
        throw Error(ErrorKind::OrderTooLow,
                    "member sum tail ratio >= 0.9 at m_max; increase the order");
      ctx.tail_err += last_term * r / (1.0 - r);
    }
    return acc;
  }

  std::vector<std::pair<long, double>> unit_terms(const SpecSet& m) const {
    std::vector<std::pair<long, double>> t;
    m.for_each_member(settings_.m_max, [&](long mem) { t.emplace_back(mem, 1.0); });
    return t;
  }

  std::vector<std::pair<long, double>> harmonic_terms(const SpecSet& m) const {
    std::vector<std::pair<long, double>> t;
    m.for_each_member(settings_.m_max, [&](long mem) { t.emplace_back(mem, 1.0 / static_cast<double>(mem)); });
    return t;
  }

  Jet2 mset_jet(const Jet2& g, const SeriesData& u, const SpecSet& m, const Ctx& ctx) const {
    // p_1 = the argument jet; p_k (k >= 2) frozen constants until they vanish
    std::vector<Jet2> pk;
    pk.push_back(Jet2());  // slot 0 unused
    pk.push_back(g);
    for (int k = 2; k <= order_; ++k) {
      Jet2 c = pleth_const(u, ctx.x, k, ctx);
      if (std::fabs(c.v) < 1e-19 && std::fabs(c.dz) < 1e-19) break;
      pk.push_back(c);
    }
    // Newton recurrence in jets: m h_m = sum_{k<=m} p_k h_{m-k}
    std::vector<Jet2> h;
    h.push_back(Jet2::constant(1.0));
    auto extend_h = [&](long upto) {
      while (static_cast<long>(h.size()) <= upto) {
        long mm = static_cast<long>(h.size());
        Jet2 acc;
        for (long k = 1; k <= mm && k < static_cast<long>(pk.size()); ++k)
          acc += pk[static_cast<size_t>(k)] * h[static_cast<size_t>(mm - k)];
        h.push_back((1.0 / static_cast<double>(mm)) * acc);
      }
    };
    Jet2 acc;
    double scale_acc = 0.0;
    double last = 0.0, prev = 0.0;
    bool converged = false;
    long last_mem = 0;
    std::vector<long> members = m.members_up_to(settings_.m_max);
    for (long mem : members) {
      extend_h(mem);
      const Jet2& term = h[static_cast<size_t>(mem)];
      acc += term;
      double ts = std::fabs(term.v) + std::fabs(term.dz) + std::fabs(term.dw) + std::fabs(term.dww);
      scale_acc = std::max(scale_acc, std::fabs(acc.v) + std::fabs(acc.dz) + std::fabs(acc.dw) +
                                          std::fabs(acc.dww));
      prev = last;
      last = ts;
      last_mem = mem;
      if (ts <= 1e-18 * (scale_acc + 1e-300)) { converged = true; break; }
    }
    if (!m.is_finite() && !converged && last_mem >= settings_.m_max - 1) {
      double r = prev > 0.0 ? last / prev : 1.0;
      if (r >= 1.0)
        throw Error(ErrorKind::DivergentEvaluation, "multiset sum diverges (h ratio >= 1)");
      if (r >= 0.9)
        throw Error(ErrorKind::OrderTooLow, "multiset tail ratio >= 0.9 at m_max");
      ctx.tail_err += last * r / (1.0 - r);
    }
    return acc;
  }

  Jet2 dcycle_jet(const Jet2& g, const SeriesData& u, const SpecSet& m, const Ctx& ctx) const {
    Jet2 a = powers_sum(harmonic_terms(m), !m.is_finite(), g, ctx);
    Jet2 b;
    for (int k = 2; k <= order_; ++k) {
      auto jset = detail::Engine::divided_set(m, k);
      if (!jset) continue;
      Jet2 uk = pleth_const(u, ctx.x, k, ctx);
      if (std::fabs(uk.v) < 1e-19 && std::fabs(uk.dz) < 1e-19) break;
      Jet2 inner = powers_sum(harmonic_terms(*jset), !jset->is_finite(), uk, ctx);
      double phi = static_cast<double>(euler_totient(static_cast<unsigned long>(k)));
      b += (phi / static_cast<double>(k)) * inner;
    }
    return a + b;
  }

  Jet2 cycle_jet(const Jet2& g, const SeriesData& u, const SpecSet& m, const Ctx& ctx) const {
    Jet2 d = dcycle_jet(g, u, m, ctx);
    Jet2 u2 = pleth_const(u, ctx.x, 2, ctx);
    auto transformed = [&](int parity, int shift) {
      std::vector<std::pair<long, double>> t;
      m.for_each_member(2 * settings_.m_max + 2, [&](long mem) {
        if (mem % 2 == parity % 2) t.emplace_back((mem - shift) / 2, 1.0);
      });
      return t;
    };
    Jet2 s1 = powers_sum(transformed(1, 1), !m.is_finite(), u2, ctx);
    Jet2 s2 = powers_sum(transformed(0, 2), !m.is_finite(), u2, ctx);
    Jet2 s3 = powers_sum(transformed(0, 0), !m.is_finite(), u2, ctx);
    return 0.5 * d + 0.5 * (g * s1) + 0.25 * (jet_pow(g, 2) * s2) + 0.25 * s3;
  }

  Jet2 eval_node(const TermPtr& t, detail::TapeNode* env, const Jet2& env_jet,
                 const Ctx& ctx) const {
    return std::visit(
        [&](const auto& n) -> Jet2 {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Term::Z>) {
            return Jet2::var_z(ctx.x);
          } else if constexpr (std::is_same_v<T, Term::W>) {
            return env_jet;
          } else if constexpr (std::is_same_v<T, Term::Const>) {
            double v = n.gen.value_at(ctx.x);
            if (std::isinf(v))
              throw Error(ErrorKind::DivergentEvaluation, "constant series diverges at x");
            return Jet2::constant(v, n.gen.derivative_at(ctx.x));
          } else if constexpr (std::is_same_v<T, Term::Scale>) {
            return to_double(n.c) * eval_node(n.t, env, env_jet, ctx);
          } else if constexpr (std::is_same_v<T, Term::Add>) {
            return eval_node(n.a, env, env_jet, ctx) + eval_node(n.b, env, env_jet, ctx);
          } else if constexpr (std::is_same_v<T, Term::Mul>) {
            return eval_node(n.a, env, env_jet, ctx) * eval_node(n.b, env, env_jet, ctx);
          } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
            Jet2 ji = eval_node(n.inner, env, env_jet, ctx);
            detail::TapeNode* ti = engine_.lookup(n.inner.get(), env);
            if (!ti) throw Error(ErrorKind::InvalidArgument, "composition tape missing");
            return eval_node(n.outer, ti, ji, ctx);
          } else if constexpr (std::is_same_v<T, Term::Std>) {
            Jet2 g = eval_node(n.arg, env, env_jet, ctx);
            detail::TapeNode* ta = engine_.lookup(n.arg.get(), env);
            if (!ta) throw Error(ErrorKind::InvalidArgument, "argument tape missing");
            switch (n.kind) {
              case StdKind::Seq:
                return powers_sum(unit_terms(n.m), !n.m.is_finite(), g, ctx);
              case StdKind::MSet:
                return mset_jet(g, series_of(ta), n.m, ctx);
              case StdKind::DCycle:
                return dcycle_jet(g, series_of(ta), n.m, ctx);
              case StdKind::Cycle:
                return cycle_jet(g, series_of(ta), n.m, ctx);
            }
            return Jet2();
          } else if constexpr (std::is_same_v<T, Term::PowSum>) {
            Jet2 g = to_double(n.c) * eval_node(n.arg, env, env_jet, ctx);
            return powers_sum(unit_terms(n.m), !n.m.is_finite(), g, ctx);
          } else {  // ExpM1
            return jet_expm1(eval_node(n.arg, env, env_jet, ctx));
          }
        },
        t->node);
  }

  TermPtr term_;
  int order_;
  JetSettings settings_;
  mutable detail::Engine engine_;
  const Series* prefix_;
  mutable std::map<detail::TapeNode*, SeriesData> series_cache_;
};

// One-shot jet of the representative of t at T, evaluated at (x, y).
inline Jet2 eval_jet(const TermPtr& t, const SolutionPrefix& sol, double x, double y,
                     JetSettings settings = {}) {
  PreparedEquation prep(t, sol, settings);
  return prep.eval(x, y).jet;
}

namespace detail {

enum class XClass { Sub, Super, Undecided };

struct InnerSolve {
  XClass cls = XClass::Undecided;
  double y = 0.0;
  Jet2 jet;
  double tail_err = 0.0;
};

// Classify x against the critical point: run the inner fixpoint y <- E(x, y)
// (Newton-accelerated from below; the iterates of a convex nonnegative E
// approach the smallest root monotonically). Convergence with E_w < 1 means
// sub-critical; divergence, E_w >= 1 on the way up, or an evaluation blow-up
// means super-critical.
inline InnerSolve classify_x(const PreparedEquation& prep, double x, double y0,
                             double divergence_bound, double tol) {
  InnerSolve out;
  double y = y0;
  try {
    for (int it = 0; it < 200; ++it) {
      auto r = prep.eval(x, y);
      out.tail_err = r.tail_err;
      double v = r.jet.v;
      if (!std::isfinite(v) || y > divergence_bound) {
        out.cls = XClass::Super;
        return out;
      }
      double g = v - y;
      if (std::fabs(g) <= tol * (1.0 + std::fabs(y))) {
        out.cls = r.jet.dw < 1.0 ? XClass::Sub : XClass::Super;
        out.y = y;
        out.jet = r.jet;
        return out;
      }
      if (r.jet.dw >= 1.0 && g > 0) {
        // below the fixpoint the slope is < 1 for sub-critical x
        out.cls = XClass::Super;
        return out;
      }
      double step = r.jet.dw < 1.0 ? g / (1.0 - r.jet.dw) : g;
      y += step;
      if (y > divergence_bound || !std::isfinite(y)) {
        out.cls = XClass::Super;
        return out;
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DivergentEvaluation || e.kind() == ErrorKind::OrderTooLow) {
      out.cls = XClass::Super;
      return out;
    }
    throw;
  }
  out.cls = XClass::Undecided;
  out.y = y;
  return out;
}

}  // namespace detail

struct CharOptions {
  double tol = 1e-8;       // residual tolerance at the returned point
  bool integral = false;   // rho < 1 holds, so the bracket may start at 0.999
  bool has_plethysm = false;
};

inline bool term_has_plethysm(const TermPtr& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Std>) {
          return n.kind != StdKind::Seq || term_has_plethysm(n.arg);
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return term_has_plethysm(n.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          return term_has_plethysm(n.a) || term_has_plethysm(n.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          return term_has_plethysm(n.outer) || term_has_plethysm(n.inner);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return term_has_plethysm(n.arg);
        } else if constexpr (std::is_same_v<T, Term::ExpM1>) {
          return term_has_plethysm(n.arg);
        } else {
          return false;
        }
      },
      t->node);
}

// Bisection on x with the sub/super classifier, then a short 2-D Newton
// polish on (E(x,y) - y, E_w(x,y) - 1). The mixed partial E_zw is taken by a
// central difference of E_w; everything else comes from exact jets.
inline CharSolution find_char_point(const PreparedEquation& prep, const SolutionPrefix& sol,
                                    const CharOptions& opt) {
  const Series& prefix = sol.series;
  double r_est = detail::growth_ratio_estimate(prefix);
  double rho_est = r_est > 0.0 ? 1.0 / r_est : 0.5;

  double x_cap = opt.has_plethysm || opt.integral ? 0.999 : std::max(10.0, 4.0 * rho_est);
  double hi = std::min(x_cap, opt.integral ? 0.999 : rho_est * 1.5 + 0.05);
  double lo = std::min(rho_est * 0.5, 0.25);

  auto prefix_estimate = [&](double x) {
    double acc = 0.0, xn = 1.0;
    int cap = std::min(prefix.order(), 200);
    for (int n = 1; n <= cap; ++n) {
      xn *= x;
      acc += to_double(prefix.at(n)) * xn;
      if (!std::isfinite(acc)) break;
    }
    return std::isfinite(acc) ? acc : 1e300;
  };

  auto classify = [&](double x) {
    double y0 = std::min(prefix_estimate(x), 1e12);
    double bound = 10.0 * std::max(1.0, y0);
    return detail::classify_x(prep, x, y0, bound, 1e-13);
  };

  // establish the bracket
  detail::InnerSolve lo_solve;
  bool have_lo = false;
  for (int tries = 0; tries < 80 && !have_lo; ++tries) {
    lo_solve = classify(lo);
    if (lo_solve.cls == detail::XClass::Sub) { have_lo = true; break; }
    lo *= 0.5;
    if (lo < 1e-12) break;
  }
  if (!have_lo) throw Error(ErrorKind::NoCriticalPoint, "no sub-critical abscissa found");

  bool have_hi = false;
  for (int tries = 0; tries < 80; ++tries) {
    auto c = classify(hi);
    if (c.cls == detail::XClass::Super) { have_hi = true; break; }
    // undecided counts as sub-critical: move right
    lo = hi;
    lo_solve = c.cls == detail::XClass::Sub ? c : lo_solve;
    double next = std::min(hi * 1.25 + 0.01, x_cap);
    if (next <= hi + 1e-15) break;
    hi = next;
  }
  if (!have_hi) throw Error(ErrorKind::NoCriticalPoint, "no super-critical abscissa found");

  // bisect to relative width 1e-12
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    auto c = classify(mid);
    if (c.cls == detail::XClass::Super) {
      hi = mid;
    } else {  // sub-critical, or undecided (bisect right)
      lo = mid;
      if (c.cls == detail::XClass::Sub) lo_solve = c;
    }
  }

  double x = lo;
  double y = lo_solve.cls == detail::XClass::Sub ? lo_solve.y : prefix_estimate(lo);
  double tail_err = lo_solve.tail_err;

  // Newton polish on (E - y, E_w - 1)
  for (int it = 0; it < 4; ++it) {
    auto r = prep.eval(x, y);
    tail_err = std::max(tail_err, r.tail_err);
    double f1 = r.jet.v - y;
    double f2 = r.jet.dw - 1.0;
    double hstep = std::max(1e-9, 1e-7 * x);
    auto rp = prep.eval(std::min(x + hstep, x_cap), y);
    auto rm = prep.eval(x - hstep, y);
    double ezw = (rp.jet.dw - rm.jet.dw) / (std::min(x + hstep, x_cap) - (x - hstep));
    double a = r.jet.dz, b = r.jet.dw - 1.0, c = ezw, d = r.jet.dww;
    double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) break;
    double dx = (f1 * d - f2 * b) / det;
    double dy = (a * f2 - c * f1) / det;
    double nx = x - dx, ny = y - dy;
    if (!(nx > 0.0) || !(ny >= 0.0) || !std::isfinite(nx) || !std::isfinite(ny)) break;
    x = std::min(nx, x_cap);
    y = ny;
  }

  auto fin = prep.eval(x, y);
  CharSolution solu;
  solu.rho = x;
  solu.tau = y;
  solu.Ez = fin.jet.dz;
  solu.Eww = fin.jet.dww;
  solu.resid_value = std::fabs(fin.jet.v - y);
  solu.resid_deriv = std::fabs(fin.jet.dw - 1.0);
  solu.tail_error = std::max(tail_err, fin.tail_err);
  solu.rho_error = 1e-12 * x + solu.resid_value / std::max(fin.jet.dz, 1e-12) +
                   solu.tail_error / std::max(fin.jet.dz, 1e-12);

  if (solu.resid_value > opt.tol || solu.resid_deriv > opt.tol)
    throw Error(ErrorKind::PrecisionLoss,
                "characteristic residuals above tolerance (value " +
                    std::to_string(solu.resid_value) + ", deriv " +
                    std::to_string(solu.resid_deriv) + ")");
  if (!(solu.Ez > 0.0))
    throw Error(ErrorKind::NoCriticalPoint, "E_z is not positive at the candidate point");
  return solu;
}

// C = q * sqrt(rho E_z / (2 pi E_ww)) on the support class n == d (mod q).
inline AsymptoticLaw asymptotic_constant(const CharSolution& sol, const PeriodInfo& p,
                                         double tol = 1e-8) {
  if (!(sol.Eww > tol))
    throw Error(ErrorKind::DegenerateSecondDerivative,
                "E_ww vanishes at the characteristic point");
  AsymptoticLaw law;
  law.rho = sol.rho;
  law.d = p.d;
  law.q = p.q;
  law.C = static_cast<double>(p.q) *
          std::sqrt(sol.rho * sol.Ez / (2.0 * M_PI * sol.Eww));
  law.support = "n == " + std::to_string(p.d) + " (mod " + std::to_string(p.q) + ")";
  return law;
}

}  // namespace polya
