#pragma once

// Exact series semantics of composite operators and the fixpoint solver.
//
// apply_operator evaluates Theta(input) truncated to the input's order;
// solve computes the unique solution prefix of w = Theta(w) for retro Theta.
// Both run on the incremental tape engine (detail/tape.hpp): the solver fixes
// one coefficient per step and the tapes extend in lockstep, so the total
// cost is one full set of convolutions rather than order-many reapplications.

#include <map>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "polya/classify.hpp"
#include "polya/detail/tape.hpp"
#include "polya/series.hpp"
#include "polya/term.hpp"

namespace polya {

namespace detail {

class Engine;

// sum over k >= 2 of phi(k)/k * sum_{j : jk in M} u(z^k)^j / j  -- the
// plethysm half of the directed-cycle operator.
class DCycleTailTape final : public TapeNode {
 public:
  DCycleTailTape(Engine* eng, TapeNode* u, SpecSet m) : eng_(eng), u_(u), m_(std::move(m)) {}

 private:
  Rat compute(int m) override;
  void extend_children(int k_max);

  Engine* eng_;
  TapeNode* u_;
  SpecSet m_;
  std::vector<std::pair<Rat, TapeNode*>> children_;  // (phi(k)/k, J_k), index k-2
};

class Engine {
 public:
  Engine(const TermPtr& term, int order) : order_(order) {
    w_vals_.assign(static_cast<size_t>(order) + 1, Rat(0));
    wt_ = make<WTape>(&w_vals_, &w_known_);
    one_ = make<OneTape>();
    zero_ = make<ZeroTape>();
    root_ = build(term, wt_);
  }

  // Solve w = Theta(w): coefficient n of a retro operator depends only on
  // coefficients 1..n-1, which are fixed by the time step n runs. A read of
  // an unfixed coefficient throws NonStabilization.
  Series solve_prefix() {
    Series out(order_);
    for (int n = 1; n <= order_; ++n) {
      Rat v = root_->coeff(n);
      if (is_negative(v))
        throw Error(ErrorKind::NegativeCoefficient,
                    "solution coefficient " + std::to_string(n) + " is negative");
      w_vals_[static_cast<size_t>(n)] = v;
      w_known_ = n;
      out.set(n, std::move(v));
    }
    return out;
  }

  Series apply(const Series& input) {
    int n = std::min(order_, input.order());
    for (int k = 1; k <= n; ++k) w_vals_[static_cast<size_t>(k)] = input.at(k);
    w_known_ = order_;  // beyond n the input is zero-extended
    Series out(n);
    for (int k = 1; k <= n; ++k) out.set(k, root_->coeff(k));
    return out;
  }

  int order() const { return order_; }

  template <class T, class... A>
  T* make(A&&... args) {
    owned_.push_back(std::make_unique<T>(std::forward<A>(args)...));
    return static_cast<T*>(owned_.back().get());
  }

  TapeNode* one() { return one_; }
  TapeNode* zero() { return zero_; }
  TapeNode* w_env() const { return wt_; }

  // tape built for a term node under a given w-binding, if any
  TapeNode* lookup(const Term* t, TapeNode* env) const {
    auto it = memo_.find(std::make_pair(t, env));
    return it == memo_.end() ? nullptr : it->second;
  }

  // u^j with sharing; u_val is a valuation lower bound of u.
  TapeNode* power(TapeNode* u, int u_val, long j) {
    if (j == 0) return one_;
    if (j == 1) return u;
    auto key = std::make_pair(u, j);
    if (auto it = pow_cache_.find(key); it != pow_cache_.end()) return it->second;
    long a = j / 2, b = j - a;
    TapeNode* t = make<MulTape>(power(u, u_val, a), power(u, u_val, b),
                                static_cast<int>(a) * u_val, static_cast<int>(b) * u_val);
    pow_cache_[key] = t;
    return t;
  }

  TapeNode* plethysm(TapeNode* u, int k) {
    if (k == 1) return u;
    auto key = std::make_pair(u, -k);  // negative exponent slot keys substitutions
    if (auto it = pow_cache_.find(key); it != pow_cache_.end()) return it->second;
    TapeNode* t = make<PlethysmTape>(u, k);
    pow_cache_[key] = t;
    return t;
  }

  // sum_{m in M} u^m
  TapeNode* unit_sum(TapeNode* u, int u_val, const SpecSet& m) {
    return std::visit(
        [&](const auto& f) -> TapeNode* {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, SpecSet::Builtin>) {
            switch (f) {
              case SpecSet::Builtin::All: return geom_sum(u, u_val, 1, 1);
              case SpecSet::Builtin::Odd: return geom_sum(u, u_val, 1, 2);
              case SpecSet::Builtin::EvenGe2: return geom_sum(u, u_val, 2, 2);
              case SpecSet::Builtin::Primes:
                return sparse_sum(u, u_val, m, [](long) -> Rat { return Rat(1); });
            }
            return zero_;
          } else if constexpr (std::is_same_v<T, SpecSet::Explicit>) {
            std::vector<std::pair<Rat, TapeNode*>> parts;
            for (long e : f.elems) parts.emplace_back(Rat(1), power(u, u_val, e));
            return make<AddNTape>(std::move(parts));
          } else if constexpr (std::is_same_v<T, SpecSet::ArithProg>) {
            return geom_sum(u, u_val, f.first, f.step);
          } else {
            std::vector<std::pair<Rat, TapeNode*>> parts;
            for (const auto& p : f.parts) parts.emplace_back(Rat(1), unit_sum(u, u_val, part_set(p)));
            return make<AddNTape>(std::move(parts));
          }
        },
        m.form());
  }

  // sum_{m in M} u^m / m
  TapeNode* harmonic_sum(TapeNode* u, int u_val, const SpecSet& m) {
    return std::visit(
        [&](const auto& f) -> TapeNode* {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, SpecSet::Builtin>) {
            switch (f) {
              case SpecSet::Builtin::All: return make<LogTape>(u);
              case SpecSet::Builtin::Odd: return harmonic_ap(u, u_val, 1, 2);
              case SpecSet::Builtin::EvenGe2: return harmonic_ap(u, u_val, 2, 2);
              case SpecSet::Builtin::Primes:
                return sparse_sum(u, u_val, m, [](long p) -> Rat { return Rat(1, p); });
            }
            return zero_;
          } else if constexpr (std::is_same_v<T, SpecSet::Explicit>) {
            std::vector<std::pair<Rat, TapeNode*>> parts;
            for (long e : f.elems) parts.emplace_back(Rat(1, e), power(u, u_val, e));
            return make<AddNTape>(std::move(parts));
          } else if constexpr (std::is_same_v<T, SpecSet::ArithProg>) {
            return harmonic_ap(u, u_val, f.first, f.step);
          } else {
            std::vector<std::pair<Rat, TapeNode*>> parts;
            for (const auto& p : f.parts)
              parts.emplace_back(Rat(1), harmonic_sum(u, u_val, part_set(p)));
            return make<AddNTape>(std::move(parts));
          }
        },
        m.form());
  }

  // {j >= 1 : j*k in M}, or nullopt when empty.
  static std::optional<SpecSet> divided_set(const SpecSet& m, long k);

  TapeNode* mset(TapeNode* u, const SpecSet& m);
  TapeNode* dcycle(TapeNode* u, const SpecSet& m);
  TapeNode* cycle(TapeNode* u, const SpecSet& m);

 private:
  friend class DCycleTailTape;

  static SpecSet part_set(const SpecSet::Part& p) {
    if (const auto* e = std::get_if<SpecSet::Explicit>(&p)) return SpecSet::explicit_set(e->elems);
    const auto& a = std::get<SpecSet::ArithProg>(p);
    return SpecSet::arith_prog(a.first, a.step);
  }

  TapeNode* geom_sum(TapeNode* u, int u_val, long first, long step) {
    return make<GeomSumTape>(power(u, u_val, first), static_cast<int>(first) * u_val,
                             power(u, u_val, step), static_cast<int>(step) * u_val);
  }

  TapeNode* harmonic_ap(TapeNode* u, int u_val, long first, long step) {
    TapeNode* w_tape = make<GeomSumTape>(power(u, u_val, first - 1),
                                         static_cast<int>(first - 1) * u_val,
                                         power(u, u_val, step), static_cast<int>(step) * u_val);
    return make<HarmonicApTape>(u, w_tape);
  }

  TapeNode* sparse_sum(TapeNode* u, int u_val, const SpecSet& m,
                       std::function<Rat(long)> weight) {
    auto enumerate = [m](long limit, const std::function<void(long)>& fn) {
      m.for_each_member(limit, fn);
    };
    auto pw = [this, u, u_val](long j) { return power(u, u_val, j); };
    return make<SparseWeightedSumTape>(enumerate, std::move(weight), pw, u_val);
  }

  // multiset row h_m(u) as a combinator DAG (small m only)
  TapeNode* h_row(TapeNode* u, int m) {
    if (m == 0) return one_;
    if (m == 1) return u;
    auto key = std::make_pair(u, static_cast<long>(1000000 + m));
    if (auto it = pow_cache_.find(key); it != pow_cache_.end()) return it->second;
    std::vector<std::pair<Rat, TapeNode*>> parts;
    for (int k = 1; k <= m; ++k) {
      TapeNode* pk = plethysm(u, k);
      TapeNode* hk = h_row(u, m - k);
      parts.emplace_back(Rat(1, m), make<MulTape>(pk, hk, k, m - k));
    }
    TapeNode* t = make<AddNTape>(std::move(parts));
    pow_cache_[key] = t;
    return t;
  }

  struct ParitySum {
    TapeNode* tape;
    long min_exp;  // minimal exponent of u2 appearing, -1 when empty
  };

  // sum over {m in M : m == parity mod 2} of u2^{(m - shift)/2}
  ParitySum parity_power_sum(TapeNode* u2, const SpecSet& m, int parity, int shift);

  TapeNode* build(const TermPtr& t, TapeNode* env) {
    auto key = std::make_pair(t.get(), env);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    TapeNode* out = std::visit(
        [&](const auto& n) -> TapeNode* {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Term::Z>) return make<ZTape>();
          else if constexpr (std::is_same_v<T, Term::W>) return env;
          else if constexpr (std::is_same_v<T, Term::Const>) return make<ConstGenTape>(n.gen);
          else if constexpr (std::is_same_v<T, Term::Scale>) return make<ScaleTape>(n.c, build(n.t, env));
          else if constexpr (std::is_same_v<T, Term::Add>) {
            std::vector<std::pair<Rat, TapeNode*>> parts;
            parts.emplace_back(Rat(1), build(n.a, env));
            parts.emplace_back(Rat(1), build(n.b, env));
            return make<AddNTape>(std::move(parts));
          } else if constexpr (std::is_same_v<T, Term::Mul>) {
            return make<MulTape>(build(n.a, env), build(n.b, env), 1, 1);
          } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
            return build(n.outer, build(n.inner, env));
          } else if constexpr (std::is_same_v<T, Term::Std>) {
            TapeNode* u = build(n.arg, env);
            switch (n.kind) {
              case StdKind::Seq: return unit_sum(u, 1, n.m);
              case StdKind::MSet: return mset(u, n.m);
              case StdKind::DCycle: return dcycle(u, n.m);
              case StdKind::Cycle: return cycle(u, n.m);
            }
            return zero_;
          } else if constexpr (std::is_same_v<T, Term::PowSum>) {
            TapeNode* u = build(n.arg, env);
            TapeNode* scaled = n.c == 1 ? u : make<ScaleTape>(n.c, u);
            return unit_sum(scaled, 1, n.m);
          } else {  // ExpM1
            TapeNode* u = build(n.arg, env);
            return make<DropConstTape>(make<ExpTape>(u));
          }
        },
        t->node);
    memo_[key] = out;
    return out;
  }

  int order_;
  std::vector<std::unique_ptr<TapeNode>> owned_;
  std::map<std::pair<const Term*, TapeNode*>, TapeNode*> memo_;
  std::map<std::pair<TapeNode*, long>, TapeNode*> pow_cache_;
  TapeNode* one_ = nullptr;
  TapeNode* zero_ = nullptr;
  TapeNode* wt_ = nullptr;
  TapeNode* root_ = nullptr;
  std::vector<Rat> w_vals_;
  int w_known_ = 0;
};

inline std::optional<SpecSet> Engine::divided_set(const SpecSet& m, long k) {
  using B = SpecSet::Builtin;
  return std::visit(
      [&](const auto& f) -> std::optional<SpecSet> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, B>) {
          switch (f) {
            case B::All: return SpecSet::all();
            case B::Odd:
              if (k % 2 == 0) return std::nullopt;
              return SpecSet::odd();
            case B::EvenGe2:
              if (k % 2 == 0) return SpecSet::all();
              return SpecSet::even_ge2();
            case B::Primes:
              if (detail::is_prime(k)) return SpecSet::explicit_set({1});
              return std::nullopt;
          }
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, SpecSet::Explicit>) {
          std::vector<long> js;
          for (long e : f.elems)
            if (e % k == 0) js.push_back(e / k);
          if (js.empty()) return std::nullopt;
          return SpecSet::explicit_set(std::move(js));
        } else if constexpr (std::is_same_v<T, SpecSet::ArithProg>) {
          // j*k == d0 (mod s), j*k >= d0
          long s = f.step, d0 = f.first;
          long g = std::gcd(k, s);
          if (d0 % g != 0) return std::nullopt;
          long sp = s / g, kp = (k / g) % sp, dp = (d0 / g) % sp;
          // modular inverse of kp mod sp by brute scan (sp is small in practice)
          long j_res = 0;
          if (sp == 1) {
            j_res = 0;
          } else {
            long inv = -1;
            for (long x = 1; x < sp; ++x)
              if ((kp * x) % sp == 1) { inv = x; break; }
            if (inv < 0) return std::nullopt;
            j_res = (dp * inv) % sp;
          }
          long j0 = j_res == 0 ? sp : j_res;
          while (j0 * k < d0) j0 += sp;
          return SpecSet::arith_prog(j0, sp);
        } else {
          std::vector<SpecSet::Part> parts;
          for (const auto& p : f.parts) {
            SpecSet ps = part_set(p);
            if (auto sub = divided_set(ps, k)) {
              std::visit([&](const auto& g2) {
                using G = std::decay_t<decltype(g2)>;
                if constexpr (std::is_same_v<G, SpecSet::Explicit> ||
                              std::is_same_v<G, SpecSet::ArithProg>)
                  parts.push_back(g2);
              }, sub->form());
            }
          }
          if (parts.empty()) return std::nullopt;
          if (parts.size() == 1) {
            if (const auto* e = std::get_if<SpecSet::Explicit>(&parts[0]))
              return SpecSet::explicit_set(e->elems);
            const auto& a = std::get<SpecSet::ArithProg>(parts[0]);
            return SpecSet::arith_prog(a.first, a.step);
          }
          return SpecSet::union_of(std::move(parts));
        }
      },
      m.form());
}

inline Rat DCycleTailTape::compute(int m) {
  extend_children(m);
  Rat acc(0);
  for (size_t i = 0; i < children_.size(); ++i) {
    long k = static_cast<long>(i) + 2;
    if (k > m) break;
    if (children_[i].second == nullptr) continue;
    const Rat& v = children_[i].second->coeff(m);
    if (!is_zero(v)) acc += children_[i].first * v;
  }
  return acc;
}

inline void DCycleTailTape::extend_children(int k_max) {
  while (static_cast<long>(children_.size()) + 1 < k_max) {
    long k = static_cast<long>(children_.size()) + 2;
    auto js = Engine::divided_set(m_, k);
    if (!js) {
      children_.emplace_back(Rat(0), nullptr);
      continue;
    }
    TapeNode* uk = eng_->plethysm(u_, static_cast<int>(k));
    TapeNode* jk = eng_->harmonic_sum(uk, static_cast<int>(k), *js);
    children_.emplace_back(rat(static_cast<long>(euler_totient(static_cast<unsigned long>(k))), k), jk);
  }
}

inline TapeNode* Engine::mset(TapeNode* u, const SpecSet& m) {
  using B = SpecSet::Builtin;
  // leading rows to subtract for truncated all/parity forms
  auto minus_rows = [&](TapeNode* base, long d0, long step, long start) -> TapeNode* {
    std::vector<std::pair<Rat, TapeNode*>> parts;
    parts.emplace_back(Rat(1), base);
    for (long r = start; r < d0; r += step)
      parts.emplace_back(Rat(-1), h_row(u, static_cast<int>(r)));
    return make<AddNTape>(std::move(parts));
  };
  return std::visit(
      [&](const auto& f) -> TapeNode* {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, B>) {
          switch (f) {
            case B::All:
              return make<DropConstTape>(make<ExpTape>(make<DirichletTape>(u, false)));
            case B::Odd:
              return make<MSetParityTape>(u, make<DirichletTailTape>(u, false),
                                          make<DirichletTailTape>(u, true), 1);
            case B::EvenGe2:
              return make<MSetParityTape>(u, make<DirichletTailTape>(u, false),
                                          make<DirichletTailTape>(u, true), 0);
            case B::Primes:
              return make<MSetRowsTape>(u, SpecSet::primes(), order_);
          }
          return zero_;
        } else if constexpr (std::is_same_v<T, SpecSet::Explicit>) {
          std::vector<std::pair<Rat, TapeNode*>> parts;
          for (long e : f.elems) parts.emplace_back(Rat(1), h_row(u, static_cast<int>(e)));
          return make<AddNTape>(std::move(parts));
        } else if constexpr (std::is_same_v<T, SpecSet::ArithProg>) {
          if (f.step == 1) {
            if (f.first == 1)
              return make<DropConstTape>(make<ExpTape>(make<DirichletTape>(u, false)));
            TapeNode* tail =
                make<MSetAllMinusIdentityTape>(u, make<DirichletTailTape>(u, false));
            return minus_rows(tail, f.first, 1, 2);  // subtract h_2 .. h_{d0-1}
          }
          if (f.step == 2) {
            TapeNode* base = make<MSetParityTape>(u, make<DirichletTailTape>(u, false),
                                                  make<DirichletTailTape>(u, true),
                                                  static_cast<int>(f.first % 2));
            return minus_rows(base, f.first, 2, f.first % 2 == 0 ? 2 : 1);
          }
          return make<MSetRowsTape>(u, SpecSet::arith_prog(f.first, f.step), order_);
        } else {
          std::vector<std::pair<Rat, TapeNode*>> parts;
          for (const auto& p : f.parts) parts.emplace_back(Rat(1), mset(u, part_set(p)));
          return make<AddNTape>(std::move(parts));
        }
      },
      m.form());
}

inline TapeNode* Engine::dcycle(TapeNode* u, const SpecSet& m) {
  std::vector<std::pair<Rat, TapeNode*>> parts;
  parts.emplace_back(Rat(1), harmonic_sum(u, 1, m));
  parts.emplace_back(Rat(1), make<DCycleTailTape>(this, u, m));
  return make<AddNTape>(std::move(parts));
}

inline Engine::ParitySum Engine::parity_power_sum(TapeNode* u2, const SpecSet& m, int parity,
                                                  int shift) {
  using B = SpecSet::Builtin;
  auto from_ap = [&](long d0, long s) -> ParitySum {
    long first;
    long stepm;
    if (s % 2 == 0) {
      if (d0 % 2 != parity % 2) return {zero_, -1};
      first = d0;
      stepm = s;
    } else {
      first = (d0 % 2 == parity % 2) ? d0 : d0 + s;
      stepm = 2 * s;
    }
    if (first < shift) {  // skip members below the shift (m=1 with shift 2 cannot happen)
      first += stepm;
    }
    long j0 = (first - shift) / 2, js = stepm / 2;
    return {geom_sum(u2, 2, j0, js) /* note: exponents j0, j0+js, ... */, j0};
  };
  return std::visit(
      [&](const auto& f) -> ParitySum {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, B>) {
          switch (f) {
            case B::All: return from_ap(1 + (parity == 0 ? 1 : 0), 1);
            case B::Odd: return parity == 1 ? from_ap(1, 2) : ParitySum{zero_, -1};
            case B::EvenGe2: return parity == 0 ? from_ap(2, 2) : ParitySum{zero_, -1};
            case B::Primes: {
              if (parity == 0) {
                // 2 is the only even prime
                long e = (2 - shift) / 2;
                return {power(u2, 2, e), e};
              }
              auto enumerate = [](long limit, const std::function<void(long)>& fn) {
                // exponents (p - shift)/2 over odd primes p; limit is in exponent units
                for (long p = 3; (p - 1) / 2 <= limit + 1; p += 2)
                  if (detail::is_prime(p)) fn((p - 1) / 2);  // shift is 1 for the odd branch
              };
              TapeNode* t = make<SparseWeightedSumTape>(
                  enumerate, [](long) -> Rat { return Rat(1); },
                  [this, u2](long j) { return power(u2, 2, j); }, 2);
              return {t, 1};
            }
          }
          return {zero_, -1};
        } else if constexpr (std::is_same_v<T, SpecSet::Explicit>) {
          std::vector<std::pair<Rat, TapeNode*>> parts;
          long mn = -1;
          for (long e : f.elems) {
            if (e % 2 != parity % 2) continue;
            long j = (e - shift) / 2;
            parts.emplace_back(Rat(1), power(u2, 2, j));
            if (mn < 0 || j < mn) mn = j;
          }
          if (parts.empty()) return {zero_, -1};
          return {make<AddNTape>(std::move(parts)), mn};
        } else if constexpr (std::is_same_v<T, SpecSet::ArithProg>) {
          return from_ap(f.first, f.step);
        } else {
          std::vector<std::pair<Rat, TapeNode*>> parts;
          long mn = -1;
          for (const auto& p : f.parts) {
            ParitySum ps = parity_power_sum(u2, part_set(p), parity, shift);
            if (ps.min_exp < 0) continue;
            parts.emplace_back(Rat(1), ps.tape);
            if (mn < 0 || ps.min_exp < mn) mn = ps.min_exp;
          }
          if (parts.empty()) return {zero_, -1};
          return {make<AddNTape>(std::move(parts)), mn};
        }
      },
      m.form());
}

inline TapeNode* Engine::cycle(TapeNode* u, const SpecSet& m) {
  TapeNode* d = dcycle(u, m);
  TapeNode* u2 = plethysm(u, 2);
  ParitySum s1 = parity_power_sum(u2, m, 1, 1);  // odd m: u2^{(m-1)/2}
  ParitySum s2 = parity_power_sum(u2, m, 0, 2);  // even m: u2^{(m-2)/2}
  ParitySum s3 = parity_power_sum(u2, m, 0, 0);  // even m: u2^{m/2}

  std::vector<std::pair<Rat, TapeNode*>> parts;
  parts.emplace_back(Rat(1, 2), d);
  if (s1.min_exp >= 0)
    parts.emplace_back(Rat(1, 2),
                       make<MulTape>(u, s1.tape, 1, static_cast<int>(2 * s1.min_exp)));
  if (s2.min_exp >= 0)
    parts.emplace_back(Rat(1, 4), make<MulTape>(power(u, 1, 2), s2.tape, 2,
                                                static_cast<int>(2 * s2.min_exp)));
  if (s3.min_exp >= 0) parts.emplace_back(Rat(1, 4), s3.tape);
  return make<AddNTape>(std::move(parts));
}

}  // namespace detail

// Exact Theta(input) truncated to the input's order.
inline Series apply_operator(const TermPtr& t, const Series& input) {
  detail::Engine eng(t, input.order());
  return eng.apply(input);
}

struct SolutionPrefix {
  Series series;
  int order;
  int stabilized_at;  // driver steps; one coefficient is fixed per step
};

// Unique solution prefix of w = Theta(w) for retro Theta. The fixpoint
// property is verified by one extra full application on a fresh engine;
// integral operators must produce integer coefficients.
inline SolutionPrefix solve(const TermPtr& t, int order) {
  if (check_retro(t) != RetroStatus::Retro)
    throw Error(ErrorKind::InvalidArgument, "solve requires a retro operator");
  detail::Engine eng(t, order);
  Series s = eng.solve_prefix();

  Series back = apply_operator(t, s);
  if (!(back == s))
    throw Error(ErrorKind::NonStabilization, "fixpoint verification failed (engine bug)");

  if (check_integral(t) && !is_integral_series(s))
    throw Error(ErrorKind::NonStabilization,
                "integral operator produced a non-integer coefficient");
  return SolutionPrefix{std::move(s), order, order};
}

// Reference implementation: plain iteration-to-stabilization by full
// reapplication. Quadratically slower than solve(); used to cross-check it
// and to observe the monotone iterate growth.
inline Series solve_by_iteration(const TermPtr& t, int order,
                                 std::vector<Series>* iterates = nullptr) {
  if (check_retro(t) != RetroStatus::Retro)
    throw Error(ErrorKind::InvalidArgument, "solve requires a retro operator");
  Series s(order);
  for (int it = 0; it <= order + 1; ++it) {
    Series next = apply_operator(t, s);
    if (iterates) iterates->push_back(next);
    if (next == s) return s;
    s = std::move(next);
  }
  throw Error(ErrorKind::NonStabilization,
              "no stabilization after order+2 iterations (classification bug)");
}

}  // namespace polya
