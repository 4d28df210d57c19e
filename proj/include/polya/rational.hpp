#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "polya/errors.hpp"

namespace polya {

// All coefficient arithmetic is exact. Rat is a general signed rational
// (GMP-backed); the nonnegativity discipline of the solution space is
// enforced at the Series boundary, not here, because intermediate tapes
// (signed exp filters, derivatives of logs) legitimately go negative.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }
inline bool is_zero(const Rat& q) { return sgn(q) == 0; }
inline bool is_negative(const Rat& q) { return sgn(q) < 0; }

// value = mantissa * 2^exp2; keeps giant coefficients representable.
struct ScaledDouble {
  double mantissa = 0.0;
  long exp2 = 0;
};

inline ScaledDouble to_scaled_double(const Rat& q) {
  if (is_zero(q)) return {0.0, 0};
  signed long en = 0, ed = 0;
  double dn = mpz_get_d_2exp(&en, mpq_numref(q.get_mpq_t()));
  double dd = mpz_get_d_2exp(&ed, mpq_denref(q.get_mpq_t()));
  return {dn / dd, en - ed};
}

// Overflow-safe conversion (saturates to +/-inf, underflows to 0).
inline double to_double(const Rat& q) {
  ScaledDouble s = to_scaled_double(q);
  if (s.mantissa == 0.0) return 0.0;
  if (s.exp2 > 1100) return s.mantissa > 0 ? HUGE_VAL : -HUGE_VAL;
  if (s.exp2 < -1100) return 0.0;
  return std::ldexp(s.mantissa, static_cast<int>(s.exp2));
}

// Natural log of a positive rational; works far beyond double range.
inline double log_rat(const Rat& q) {
  if (sgn(q) <= 0) throw Error(ErrorKind::InvalidArgument, "log of nonpositive rational");
  ScaledDouble s = to_scaled_double(q);
  return std::log(s.mantissa) + static_cast<double>(s.exp2) * M_LN2;
}

// q * x^n as a double without intermediate overflow (x > 0).
inline double scaled_term(const Rat& q, double log_x, long n) {
  if (is_zero(q)) return 0.0;
  ScaledDouble s = to_scaled_double(q);
  double log_term = std::log(std::fabs(s.mantissa)) + static_cast<double>(s.exp2) * M_LN2 +
                    static_cast<double>(n) * log_x;
  if (log_term > 700.0) return s.mantissa > 0 ? HUGE_VAL : -HUGE_VAL;
  double v = std::exp(log_term);
  return s.mantissa > 0 ? v : -v;
}

inline Int factorial(unsigned long n) {
  Int f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

inline Int int_pow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Rat rat_pow(const Rat& base, unsigned long e) {
  Rat r;
  mpz_pow_ui(mpq_numref(r.get_mpq_t()), mpq_numref(base.get_mpq_t()), e);
  mpz_pow_ui(mpq_denref(r.get_mpq_t()), mpq_denref(base.get_mpq_t()), e);
  return r;  // base canonical => power canonical
}

inline std::string rat_string(const Rat& q) { return q.get_str(); }

inline unsigned long euler_totient(unsigned long k) {
  unsigned long result = k;
  unsigned long n = k;
  for (unsigned long p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

}  // namespace polya
