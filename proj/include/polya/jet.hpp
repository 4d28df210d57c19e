#pragma once

#include <cmath>

#include "polya/errors.hpp"

namespace polya {

// Second-order forward jet of a bivariate evaluation: value plus the partials
// d/dz, d/dw, d2/dw2 at the evaluation point. Everything the Main-Theorem
// constant needs, propagated through the operator AST.
struct Jet2 {
  double v = 0.0;
  double dz = 0.0;
  double dw = 0.0;
  double dww = 0.0;

  static Jet2 constant(double value, double ddz = 0.0) { return {value, ddz, 0.0, 0.0}; }
  static Jet2 var_z(double x) { return {x, 1.0, 0.0, 0.0}; }
  static Jet2 var_w(double y) { return {y, 0.0, 1.0, 0.0}; }

  Jet2& operator+=(const Jet2& o) {
    v += o.v; dz += o.dz; dw += o.dw; dww += o.dww;
    return *this;
  }
  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }

  friend Jet2 operator*(double c, const Jet2& a) { return {c * a.v, c * a.dz, c * a.dw, c * a.dww}; }

  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.dz * b.v + a.v * b.dz,
            a.dw * b.v + a.v * b.dw,
            a.dww * b.v + 2.0 * a.dw * b.dw + a.v * b.dww};
  }

  // scalar-function composition f(u) with f', f'' supplied
  Jet2 lift(double f, double f1, double f2) const {
    return {f, f1 * dz, f1 * dw, f2 * dw * dw + f1 * dww};
  }
};

inline Jet2 jet_exp(const Jet2& u) {
  double e = std::exp(u.v);
  return u.lift(e, e, e);
}

inline Jet2 jet_expm1(const Jet2& u) {
  double e = std::exp(u.v);
  return u.lift(std::expm1(u.v), e, e);
}

inline Jet2 jet_pow(const Jet2& u, long m) {
  if (m == 0) return Jet2::constant(1.0);
  if (m == 1) return u;
  double pm2 = std::pow(u.v, static_cast<double>(m - 2));
  double pm1 = pm2 * u.v;
  double p = pm1 * u.v;
  double md = static_cast<double>(m);
  return u.lift(p, md * pm1, md * (md - 1.0) * pm2);
}

// 1/(1-u); requires u.v < 1
inline Jet2 jet_geom_inv(const Jet2& u) {
  double d = 1.0 - u.v;
  if (d <= 0.0) throw Error(ErrorKind::DivergentEvaluation, "1/(1-u) at u >= 1");
  double inv = 1.0 / d;
  return u.lift(inv, inv * inv, 2.0 * inv * inv * inv);
}

}  // namespace polya
