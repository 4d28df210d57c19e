#pragma once

#include <complex>
#include <numeric>
#include <vector>

#include "polya/fixpoint.hpp"
#include "polya/specset.hpp"
#include "polya/term.hpp"

namespace polya {

// Shift-periodic constants of the solution: d = min of the spectrum, q = gcd
// of the support gaps. Every nonzero coefficient index is == d (mod q).
struct PeriodInfo {
  long d = 0;
  long q = 1;
  int stabilization_span = 0;  // trailing support points with unchanged gcd
  enum class Exactness { ProvedStable, PrefixEstimate } exactness = Exactness::PrefixEstimate;
};

// (d, q) read off the solution prefix. ProvedStable when the running gcd
// reached its final value by index N/2 and at least 8 support points confirm
// it; otherwise a declared PrefixEstimate.
inline PeriodInfo compute_dq(const SolutionPrefix& prefix) {
  const Series& s = prefix.series;
  int first = s.first_nonzero();
  if (first == 0) throw Error(ErrorKind::ZeroSolution, "solution prefix is identically zero");
  PeriodInfo info;
  info.d = first;
  long g = 0;
  int last_change = first;
  int confirmations = 0;
  for (int n = first; n <= s.order(); ++n) {
    if (is_zero(s.at(n))) continue;
    long g2 = std::gcd(g, static_cast<long>(n) - info.d);
    if (g2 != g) {
      g = g2;
      last_change = n;
      confirmations = 0;
    } else {
      ++confirmations;
    }
  }
  info.stabilization_span = confirmations;
  if (g == 0) {
    // a single support point determines no period; report the trivial one
    info.q = 1;
    info.exactness = PeriodInfo::Exactness::PrefixEstimate;
    return info;
  }
  info.q = g;
  bool stable = last_change <= s.order() / 2 && confirmations >= 8;
  info.exactness = stable ? PeriodInfo::Exactness::ProvedStable : PeriodInfo::Exactness::PrefixEstimate;
  return info;
}

// The q equally spaced dominant singularities rho * exp(2*pi*i*j/q).
inline std::vector<std::complex<double>> dominant_singularities(double rho, long q) {
  if (rho <= 0) throw Error(ErrorKind::InvalidArgument, "rho must be positive");
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be positive");
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<size_t>(q));
  for (long j = 0; j < q; ++j) {
    double theta = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(q);
    out.emplace_back(rho * std::cos(theta), rho * std::sin(theta));
  }
  return out;
}

namespace detail {

// w-power decomposition of an elementary term: spectra of the E_n(z), all
// truncated to the horizon. "exact" records whether every generator spectrum
// is eventually periodic with the period reached inside the horizon.
struct WDecomp {
  std::vector<SpectrumPrefix> deg;  // index = w-degree
  bool exact = true;
  int horizon;

  explicit WDecomp(int h) : horizon(h) {}

  SpectrumPrefix& at_deg(size_t j) {
    while (deg.size() <= j) deg.emplace_back(horizon);
    return deg[j];
  }
};

inline WDecomp decomp_mul(const WDecomp& a, const WDecomp& b) {
  WDecomp r(a.horizon);
  r.exact = a.exact && b.exact;
  size_t cap = static_cast<size_t>(a.horizon) + 1;
  for (size_t i = 0; i < a.deg.size(); ++i) {
    if (a.deg[i].empty()) continue;
    for (size_t j = 0; j < b.deg.size(); ++j) {
      if (b.deg[j].empty()) continue;
      if (i + j >= cap) { r.exact = r.exact && false; continue; }
      r.at_deg(i + j).union_with(sum_shift(a.deg[i], b.deg[j]));
    }
  }
  return r;
}

inline WDecomp decomp_of(const TermPtr& t, int horizon);

inline WDecomp decomp_powers_sum(const WDecomp& base, const SpecSet& m, int horizon) {
  // sum over members of M of base^m, degree- and horizon-capped
  WDecomp acc(horizon);
  acc.exact = base.exact;
  WDecomp pw(horizon);
  pw.at_deg(0).set(0);  // base^0 = 1
  long prev = 0;
  bool capped = false;
  std::vector<long> members = m.members_up_to(horizon);
  if (!m.is_finite()) capped = true;  // members beyond the horizon are cut off
  for (long mem : members) {
    for (long step = prev; step < mem; ++step) pw = decomp_mul(pw, base);
    prev = mem;
    for (size_t j = 0; j < pw.deg.size(); ++j)
      if (!pw.deg[j].empty()) acc.at_deg(j).union_with(pw.deg[j]);
    acc.exact = acc.exact && pw.exact;
  }
  if (capped) {
    // dropped powers only contribute elements beyond the horizon: for a
    // valuation >= 1 base, base^m has no entries <= horizon once m > horizon
  }
  return acc;
}

inline WDecomp decomp_of(const TermPtr& t, int horizon) {
  return std::visit(
      [&](const auto& n) -> WDecomp {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z>) {
          WDecomp r(horizon);
          r.at_deg(0).set(1);
          return r;
        } else if constexpr (std::is_same_v<T, Term::W>) {
          WDecomp r(horizon);
          r.at_deg(1).set(0);
          return r;
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          WDecomp r(horizon);
          SpectrumPrefix sp = SpectrumPrefix::from_series(n.gen.prefix(horizon));
          r.at_deg(0).union_with(sp);
          r.exact = n.gen.kind() != Generator::Kind::UserList;
          return r;
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return decomp_of(n.t, horizon);  // positive scalars keep the spectrum
        } else if constexpr (std::is_same_v<T, Term::Add>) {
          WDecomp a = decomp_of(n.a, horizon);
          WDecomp b = decomp_of(n.b, horizon);
          for (size_t j = 0; j < b.deg.size(); ++j)
            if (!b.deg[j].empty()) a.at_deg(j).union_with(b.deg[j]);
          a.exact = a.exact && b.exact;
          return a;
        } else if constexpr (std::is_same_v<T, Term::Mul>) {
          return decomp_mul(decomp_of(n.a, horizon), decomp_of(n.b, horizon));
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          // substitute the inner decomposition into the outer's w-slots
          WDecomp outer = decomp_of(n.outer, horizon);
          WDecomp inner = decomp_of(n.inner, horizon);
          WDecomp acc(horizon);
          acc.exact = outer.exact && inner.exact;
          WDecomp pw(horizon);
          pw.at_deg(0).set(0);
          for (size_t j = 0; j < outer.deg.size(); ++j) {
            if (!outer.deg[j].empty()) {
              WDecomp lifted(horizon);
              lifted.at_deg(0) = outer.deg[j];
              WDecomp term = decomp_mul(lifted, pw);
              for (size_t k = 0; k < term.deg.size(); ++k)
                if (!term.deg[k].empty()) acc.at_deg(k).union_with(term.deg[k]);
              acc.exact = acc.exact && term.exact;
            }
            pw = decomp_mul(pw, inner);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          if (n.kind != StdKind::Seq)
            throw Error(ErrorKind::NotElementary,
                        std::string(to_string(n.kind)) + " has plethysm terms");
          return decomp_powers_sum(decomp_of(n.arg, horizon), n.m, horizon);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return decomp_powers_sum(decomp_of(n.arg, horizon), n.m, horizon);
        } else {  // ExpM1: all powers m >= 1
          return decomp_powers_sum(decomp_of(n.arg, horizon), SpecSet::all(), horizon);
        }
      },
      t->node);
}

}  // namespace detail

// Operator-side (d, q): expands the elementary term's w-power decomposition
// E_n(z) symbolically and takes q = gcd of U(E_n + (n-1)d). Only defined for
// plethysm-free terms; cross-checks the prefix route.
inline PeriodInfo elementary_dq(const TermPtr& t, const SolutionPrefix& prefix) {
  int horizon = prefix.series.order();
  detail::WDecomp dec = detail::decomp_of(t, horizon);

  if (dec.deg.empty() || dec.deg[0].empty())
    throw Error(ErrorKind::NotElementary, "no constant part in the decomposition");
  long d = dec.deg[0].members().front();

  long q = 0;
  for (size_t n = 0; n < dec.deg.size(); ++n) {
    for (int e : dec.deg[n].members()) {
      long v = static_cast<long>(e) + (static_cast<long>(n) - 1) * d;
      q = std::gcd(q, v);
    }
  }
  PeriodInfo info;
  info.d = d;
  info.q = q == 0 ? 1 : q;
  info.stabilization_span = horizon;
  info.exactness = dec.exact ? PeriodInfo::Exactness::ProvedStable
                             : PeriodInfo::Exactness::PrefixEstimate;
  return info;
}

// Whether t is in the elementary fragment elementary_dq accepts.
inline bool is_elementary_term(const TermPtr& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Std>) {
          return n.kind == StdKind::Seq && is_elementary_term(n.arg);
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return is_elementary_term(n.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          return is_elementary_term(n.a) && is_elementary_term(n.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          return is_elementary_term(n.outer) && is_elementary_term(n.inner);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return is_elementary_term(n.arg);
        } else if constexpr (std::is_same_v<T, Term::ExpM1>) {
          return is_elementary_term(n.arg);
        } else {
          return true;  // Z, W, Const
        }
      },
      t->node);
}

}  // namespace polya
