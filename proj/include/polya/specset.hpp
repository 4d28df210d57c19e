#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "polya/errors.hpp"
#include "polya/series.hpp"

namespace polya {

namespace detail {

// Sieve-backed primality, deterministic for the DSL's range.
inline const std::vector<bool>& prime_sieve() {
  static const std::vector<bool> sieve = [] {
    const size_t limit = 1u << 20;
    std::vector<bool> is_prime(limit + 1, true);
    is_prime[0] = is_prime[1] = false;
    for (size_t p = 2; p * p <= limit; ++p)
      if (is_prime[p])
        for (size_t q = p * p; q <= limit; q += p) is_prime[q] = false;
    return is_prime;
  }();
  return sieve;
}

inline bool is_prime(long m) {
  if (m < 2) return false;
  const auto& sieve = prime_sieve();
  if (static_cast<size_t>(m) < sieve.size()) return sieve[static_cast<size_t>(m)];
  if (m > 1'000'000'000'000L)
    throw Error(ErrorKind::InvalidArgument, "primality query out of supported range");
  for (long p = 2; p * p <= m; ++p)
    if (m % p == 0) return false;
  return true;
}

}  // namespace detail

// Restriction index set M for the Delta_M operators. Always nonempty, all
// elements >= 1. Union parts must be pairwise disjoint (checked on
// construction by enumeration).
class SpecSet {
 public:
  enum class Builtin { All, Odd, EvenGe2, Primes };
  struct Explicit {
    std::vector<long> elems;  // sorted, unique, >= 1
    bool operator==(const Explicit&) const = default;
  };
  struct ArithProg {
    long first;  // >= 1
    long step;   // >= 1; the infinite set {first, first+step, ...}
    bool operator==(const ArithProg&) const = default;
  };
  using Part = std::variant<Explicit, ArithProg>;
  struct UnionForm {
    std::vector<Part> parts;
    bool operator==(const UnionForm&) const = default;
  };
  using Form = std::variant<Builtin, Explicit, ArithProg, UnionForm>;

  static SpecSet all() { return SpecSet(Builtin::All); }
  static SpecSet odd() { return SpecSet(Builtin::Odd); }
  static SpecSet even_ge2() { return SpecSet(Builtin::EvenGe2); }
  static SpecSet primes() { return SpecSet(Builtin::Primes); }

  static SpecSet explicit_set(std::vector<long> elems) {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    if (elems.empty()) throw Error(ErrorKind::InvalidArgument, "empty restriction set");
    if (elems.front() < 1) throw Error(ErrorKind::InvalidArgument, "restriction elements must be >= 1");
    SpecSet s;
    s.form_ = Explicit{std::move(elems)};
    s.init_cache();
    return s;
  }

  static SpecSet arith_prog(long first, long step) {
    if (first < 1 || step < 1)
      throw Error(ErrorKind::InvalidArgument, "ap(first, step) needs first, step >= 1");
    SpecSet s;
    s.form_ = ArithProg{first, step};
    s.init_cache();
    return s;
  }

  static SpecSet union_of(std::vector<Part> parts) {
    if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "empty union");
    SpecSet s;
    s.form_ = UnionForm{std::move(parts)};
    s.check_union_disjoint();
    s.init_cache();
    return s;
  }

  bool member(long m) const {
    if (m < 1) return false;
    return std::visit(
        [m](const auto& f) -> bool {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Builtin>) {
            switch (f) {
              case Builtin::All: return true;
              case Builtin::Odd: return m % 2 == 1;
              case Builtin::EvenGe2: return m % 2 == 0;
              case Builtin::Primes: return detail::is_prime(m);
            }
            return false;
          } else if constexpr (std::is_same_v<T, Explicit>) {
            return std::binary_search(f.elems.begin(), f.elems.end(), m);
          } else if constexpr (std::is_same_v<T, ArithProg>) {
            return m >= f.first && (m - f.first) % f.step == 0;
          } else {
            for (const auto& p : f.parts)
              if (std::visit([m](const auto& g) { return part_member(g, m); }, p)) return true;
            return false;
          }
        },
        form_);
  }

  long min_element() const { return min_; }
  long gcd_elements() const { return gcd_; }
  bool is_finite() const { return finite_; }
  // whether sum_{m in M} 1/m diverges; true for every infinite form here
  bool harmonic_divergent() const { return harmonic_divergent_; }
  bool contains_one() const { return member(1); }
  bool is_singleton_one() const { return finite_ && min_ == 1 && max_ == 1; }
  long max_element() const {
    if (!finite_) throw Error(ErrorKind::InvalidArgument, "max of infinite restriction set");
    return max_;
  }

  // Ascending enumeration of members <= limit.
  template <class F>
  void for_each_member(long limit, F&& fn) const {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Builtin>) {
            switch (f) {
              case Builtin::All:
                for (long m = 1; m <= limit; ++m) fn(m);
                break;
              case Builtin::Odd:
                for (long m = 1; m <= limit; m += 2) fn(m);
                break;
              case Builtin::EvenGe2:
                for (long m = 2; m <= limit; m += 2) fn(m);
                break;
              case Builtin::Primes:
                for (long m = 2; m <= limit; ++m)
                  if (detail::is_prime(m)) fn(m);
                break;
            }
          } else if constexpr (std::is_same_v<T, Explicit>) {
            for (long m : f.elems)
              if (m <= limit) fn(m);
          } else if constexpr (std::is_same_v<T, ArithProg>) {
            for (long m = f.first; m <= limit; m += f.step) fn(m);
          } else {
            // merge the (disjoint) parts in ascending order
            std::vector<long> merged;
            for (const auto& p : f.parts)
              std::visit(
                  [&](const auto& g) {
                    using G = std::decay_t<decltype(g)>;
                    if constexpr (std::is_same_v<G, Explicit>) {
                      for (long m : g.elems)
                        if (m <= limit) merged.push_back(m);
                    } else {
                      for (long m = g.first; m <= limit; m += g.step) merged.push_back(m);
                    }
                  },
                  p);
            std::sort(merged.begin(), merged.end());
            for (long m : merged) fn(m);
          }
        },
        form_);
  }

  std::vector<long> members_up_to(long limit) const {
    std::vector<long> out;
    for_each_member(limit, [&](long m) { out.push_back(m); });
    return out;
  }

  // DSL surface form: {2,3} | odd | even | primes | all | ap(first,step)
  std::string to_dsl() const {
    return std::visit(
        [this](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Builtin>) {
            switch (f) {
              case Builtin::All: return "all";
              case Builtin::Odd: return "odd";
              case Builtin::EvenGe2: return "even";
              case Builtin::Primes: return "primes";
            }
            return "?";
          } else if constexpr (std::is_same_v<T, Explicit>) {
            std::string out = "{";
            for (size_t i = 0; i < f.elems.size(); ++i) {
              if (i) out += ",";
              out += std::to_string(f.elems[i]);
            }
            return out + "}";
          } else if constexpr (std::is_same_v<T, ArithProg>) {
            return "ap(" + std::to_string(f.first) + "," + std::to_string(f.step) + ")";
          } else {
            (void)this;
            std::string out = "union(";
            for (size_t i = 0; i < f.parts.size(); ++i) {
              if (i) out += ";";
              out += std::visit(
                  [](const auto& g) -> std::string {
                    using G = std::decay_t<decltype(g)>;
                    if constexpr (std::is_same_v<G, Explicit>) {
                      std::string o = "{";
                      for (size_t j = 0; j < g.elems.size(); ++j) {
                        if (j) o += ",";
                        o += std::to_string(g.elems[j]);
                      }
                      return o + "}";
                    } else {
                      return "ap(" + std::to_string(g.first) + "," + std::to_string(g.step) + ")";
                    }
                  },
                  f.parts[i]);
            }
            return out + ")";
          }
        },
        form_);
  }

  bool is_all() const {
    return std::holds_alternative<Builtin>(form_) && std::get<Builtin>(form_) == Builtin::All;
  }

  bool operator==(const SpecSet& o) const { return form_ == o.form_; }

  const Form& form() const { return form_; }

 private:
  SpecSet() = default;
  explicit SpecSet(Builtin b) : form_(b) { init_cache(); }

  static bool part_member(const Explicit& g, long m) {
    return std::binary_search(g.elems.begin(), g.elems.end(), m);
  }
  static bool part_member(const ArithProg& g, long m) {
    return m >= g.first && (m - g.first) % g.step == 0;
  }

  void check_union_disjoint() const {
    const auto& parts = std::get<UnionForm>(form_).parts;
    for (long m = 1; m <= 1000; ++m) {
      int hits = 0;
      for (const auto& p : parts)
        if (std::visit([m](const auto& g) { return part_member(g, m); }, p)) ++hits;
      if (hits > 1)
        throw Error(ErrorKind::InvalidArgument, "union parts overlap at " + std::to_string(m));
    }
  }

  void init_cache() {
    std::visit(
        [this](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Builtin>) {
            switch (f) {
              case Builtin::All: min_ = 1; gcd_ = 1; break;
              case Builtin::Odd: min_ = 1; gcd_ = 1; break;
              case Builtin::EvenGe2: min_ = 2; gcd_ = 2; break;
              case Builtin::Primes: min_ = 2; gcd_ = 1; break;
            }
            finite_ = false;
            harmonic_divergent_ = true;
          } else if constexpr (std::is_same_v<T, Explicit>) {
            min_ = f.elems.front();
            max_ = f.elems.back();
            gcd_ = 0;
            for (long m : f.elems) gcd_ = std::gcd(gcd_, m);
            finite_ = true;
            harmonic_divergent_ = false;
          } else if constexpr (std::is_same_v<T, ArithProg>) {
            min_ = f.first;
            gcd_ = std::gcd(f.first, f.step);
            finite_ = false;
            harmonic_divergent_ = true;  // sum over an infinite AP of 1/m diverges
          } else {
            min_ = 0;
            gcd_ = 0;
            finite_ = true;
            harmonic_divergent_ = false;
            max_ = 0;
            for (const auto& p : f.parts) {
              std::visit(
                  [this](const auto& g) {
                    using G = std::decay_t<decltype(g)>;
                    if constexpr (std::is_same_v<G, Explicit>) {
                      min_ = min_ == 0 ? g.elems.front() : std::min(min_, g.elems.front());
                      max_ = std::max(max_, g.elems.back());
                      for (long m : g.elems) gcd_ = std::gcd(gcd_, m);
                    } else {
                      min_ = min_ == 0 ? g.first : std::min(min_, g.first);
                      gcd_ = std::gcd(gcd_, std::gcd(g.first, g.step));
                      finite_ = false;
                      harmonic_divergent_ = true;
                    }
                  },
                  p);
            }
          }
        },
        form_);
  }

  Form form_ = Builtin::All;
  long min_ = 1;
  long max_ = 0;  // meaningful only when finite
  long gcd_ = 1;
  bool finite_ = false;
  bool harmonic_divergent_ = true;
};

// Finite-prefix spectrum: bit n set <=> the represented series has a(n) != 0,
// for n <= horizon. Bit 0 is representable because sumset algebra produces it.
class SpectrumPrefix {
 public:
  explicit SpectrumPrefix(int horizon) : horizon_(horizon), words_((static_cast<size_t>(horizon) >> 6) + 1) {
    if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "spectrum horizon must be >= 1");
  }

  static SpectrumPrefix from_series(const Series& a) {
    SpectrumPrefix s(a.order());
    for (int n = 1; n <= a.order(); ++n)
      if (!is_zero(a.at(n))) s.set(n);
    return s;
  }

  static SpectrumPrefix singleton(int n, int horizon) {
    SpectrumPrefix s(horizon);
    s.set(n);
    return s;
  }

  static SpectrumPrefix from_elems(const std::vector<int>& elems, int horizon) {
    SpectrumPrefix s(horizon);
    for (int n : elems) s.set(n);
    return s;
  }

  int horizon() const { return horizon_; }

  void set(int n) {
    if (n < 0 || n > horizon_) throw Error(ErrorKind::InvalidArgument, "spectrum index out of range");
    words_[static_cast<size_t>(n) >> 6] |= (uint64_t{1} << (n & 63));
  }

  bool test(int n) const {
    if (n < 0 || n > horizon_) return false;
    return (words_[static_cast<size_t>(n) >> 6] >> (n & 63)) & 1;
  }

  bool empty() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }

  std::vector<int> members() const {
    std::vector<int> out;
    for (int n = 0; n <= horizon_; ++n)
      if (test(n)) out.push_back(n);
    return out;
  }

  SpectrumPrefix& union_with(const SpectrumPrefix& o) {
    if (o.horizon_ != horizon_) throw Error(ErrorKind::InvalidArgument, "horizon mismatch");
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  bool operator==(const SpectrumPrefix& o) const = default;

  friend SpectrumPrefix sum_shift(const SpectrumPrefix& a, const SpectrumPrefix& b) {
    if (a.horizon_ != b.horizon_) throw Error(ErrorKind::InvalidArgument, "horizon mismatch");
    SpectrumPrefix r(a.horizon_);
    for (int i = 0; i <= a.horizon_; ++i) {
      if (!a.test(i)) continue;
      r.or_shifted(b, i);
    }
    r.mask_tail();
    return r;
  }

 private:
  // r |= (b << k), truncated to horizon
  void or_shifted(const SpectrumPrefix& b, int k) {
    int word_shift = k >> 6, bit_shift = k & 63;
    for (size_t i = 0; i + static_cast<size_t>(word_shift) < words_.size(); ++i) {
      uint64_t w = b.words_[i];
      if (!w) continue;
      size_t j = i + static_cast<size_t>(word_shift);
      words_[j] |= (w << bit_shift);
      if (bit_shift && j + 1 < words_.size()) words_[j + 1] |= (w >> (64 - bit_shift));
    }
  }

  void mask_tail() {
    int top_bits = (horizon_ + 1) & 63;
    if (top_bits) words_.back() &= (uint64_t{1} << top_bits) - 1;
  }

  int horizon_;
  std::vector<uint64_t> words_;
};

// m-fold sumset; 0 (.) J = {0}.
inline SpectrumPrefix odot(int m, const SpectrumPrefix& j) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "odot needs m >= 0");
  SpectrumPrefix acc = SpectrumPrefix::singleton(0, j.horizon());
  for (int i = 0; i < m; ++i) acc = sum_shift(acc, j);
  return acc;
}

// gcd of {j - shift : j in J}; 0 for an empty prefix (and gcd{0} == 0).
inline long gcd_of(const SpectrumPrefix& j, long shift) {
  long g = 0;
  bool seen = false;
  for (int n = 0; n <= j.horizon(); ++n) {
    if (!j.test(n)) continue;
    if (n < shift) throw Error(ErrorKind::InvalidArgument, "shift exceeds a spectrum element");
    g = std::gcd(g, n - shift);
    seen = true;
  }
  return seen ? g : 0;
}

}  // namespace polya
