#pragma once

// Incremental evaluation engine for composite operators.
//
// Every AST node (plus the auxiliary recurrences behind the standard
// operators) becomes a "tape": a lazily extended coefficient vector where
// coefficient m is computed exactly once, after 0..m-1. Extending the root
// tape coefficient-by-coefficient both solves w = Theta(w) (the w leaf reads
// the prefix built so far; a read of the current index means the operator is
// not retro and raises NonStabilization) and applies Theta to a fixed input.
// Each convolution maintains running state, so a full order-N run costs one
// convolution per product node instead of N of them.

#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "polya/errors.hpp"
#include "polya/term.hpp"

namespace polya::detail {

class TapeNode {
 public:
  virtual ~TapeNode() = default;

  // Extends the tape through index m and returns c[m].
  const Rat& coeff(int m) {
    ensure(m);
    return c_[static_cast<size_t>(m)];
  }

  void ensure(int m) {
    while (hi_ < m) {
      Rat v = compute(hi_ + 1);
      ++hi_;
      if (!is_zero(v)) nz_.push_back(hi_);
      c_.push_back(std::move(v));
    }
  }

  // Unchecked read of an already computed index.
  const Rat& at(int k) const { return c_[static_cast<size_t>(k)]; }
  const std::vector<int>& nonzeros() const { return nz_; }
  int computed_to() const { return hi_; }

 protected:
  virtual Rat compute(int m) = 0;

  std::vector<Rat> c_;
  std::vector<int> nz_;
  int hi_ = -1;
};

class ZeroTape final : public TapeNode {
  Rat compute(int) override { return Rat(0); }
};

class OneTape final : public TapeNode {  // the constant series 1
  Rat compute(int m) override { return Rat(m == 0 ? 1 : 0); }
};

class ZTape final : public TapeNode {
  Rat compute(int m) override { return Rat(m == 1 ? 1 : 0); }
};

class ConstGenTape final : public TapeNode {
 public:
  explicit ConstGenTape(Generator gen) : gen_(std::move(gen)) {}

 private:
  Rat compute(int m) override { return m == 0 ? Rat(0) : gen_.coeff(m); }
  Generator gen_;
};

// The w leaf. In solve mode reading an index that is not fixed yet is the
// retro violation the spec calls NonStabilization.
class WTape final : public TapeNode {
 public:
  WTape(const std::vector<Rat>* values, const int* known)
      : values_(values), known_(known) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(0);
    if (m > *known_)
      throw Error(ErrorKind::NonStabilization,
                  "operator reads coefficient " + std::to_string(m) +
                      " while solving for it (not retro)");
    return (*values_)[static_cast<size_t>(m)];
  }
  const std::vector<Rat>* values_;
  const int* known_;
};

class ScaleTape final : public TapeNode {
 public:
  ScaleTape(Rat c, TapeNode* x) : c_scale_(std::move(c)), x_(x) {}

 private:
  Rat compute(int m) override { return c_scale_ * x_->coeff(m); }
  Rat c_scale_;
  TapeNode* x_;
};

// Weighted sum of tapes, kept flat to avoid deep recursion chains.
class AddNTape final : public TapeNode {
 public:
  explicit AddNTape(std::vector<std::pair<Rat, TapeNode*>> parts) : parts_(std::move(parts)) {}

 private:
  Rat compute(int m) override {
    Rat acc(0);
    for (auto& [w, t] : parts_) acc += w * t->coeff(m);
    return acc;
  }
  std::vector<std::pair<Rat, TapeNode*>> parts_;
};

// Product with known valuation lower bounds for the factors. The bounds cap
// which indices of each factor are ever touched; for two DOM factors the
// current index is never read, which is what makes products retro.
class MulTape final : public TapeNode {
 public:
  MulTape(TapeNode* a, TapeNode* b, int a_val, int b_val)
      : a_(a), b_(b), a_val_(a_val), b_val_(b_val) {}

 private:
  Rat compute(int m) override {
    Rat acc(0);
    if (m < a_val_ + b_val_) return acc;
    a_->ensure(m - b_val_);
    b_->ensure(m - a_val_);
    for (int k : a_->nonzeros()) {
      if (k > m - b_val_) break;
      const Rat& bv = b_->at(m - k);
      if (!is_zero(bv)) acc += a_->at(k) * bv;
    }
    return acc;
  }
  TapeNode* a_;
  TapeNode* b_;
  int a_val_;
  int b_val_;
};

// x shifted down by its constant term (exp(L) - 1 style outputs).
class DropConstTape final : public TapeNode {
 public:
  explicit DropConstTape(TapeNode* x) : x_(x) {}

 private:
  Rat compute(int m) override { return m == 0 ? Rat(0) : x_->coeff(m); }
  TapeNode* x_;
};

// u(z^k): coefficient m is u(m/k) when k | m. For k >= 2 this reads strictly
// backwards, which keeps plethysm parts retro.
class PlethysmTape final : public TapeNode {
 public:
  PlethysmTape(TapeNode* u, int k) : u_(u), k_(k) {}

 private:
  Rat compute(int m) override {
    if (m % k_ != 0) return Rat(0);
    return u_->coeff(m / k_);
  }
  TapeNode* u_;
  int k_;
};

// V = sum of u^j over the progression {j0, j0+step, ...} via
// V = u^{j0} + u^{step} * V. Exponent 0 is allowed (P = 1).
class GeomSumTape final : public TapeNode {
 public:
  GeomSumTape(TapeNode* p, int p_val, TapeNode* q, int q_val)
      : p_(p), p_val_(p_val), q_(q), q_val_(q_val) {}

 private:
  Rat compute(int m) override {
    Rat acc = p_->coeff(m);
    int kmax = m - p_val_;  // V(i) = 0 below the valuation of P
    if (kmax >= q_val_) {
      q_->ensure(kmax);
      for (int k : q_->nonzeros()) {
        if (k > kmax) break;
        const Rat& self = c_[static_cast<size_t>(m - k)];
        if (!is_zero(self)) acc += q_->at(k) * self;
      }
    }
    return acc;
  }
  TapeNode* p_;
  int p_val_;  // valuation bound of the whole sum (= valuation of P)
  TapeNode* q_;
  int q_val_;
};

// B = exp(L) for L with zero constant term: m B(m) = sum k L(k) B(m-k).
// L is read at the current index only when it genuinely contributes
// (B(0) = 1), which is the m = 1 passthrough of multiset-style operators.
class ExpTape final : public TapeNode {
 public:
  explicit ExpTape(TapeNode* l) : l_(l) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(1);
    Rat acc(0);
    l_->ensure(m);
    for (int k : l_->nonzeros()) {
      if (k > m) break;
      const Rat& b = c_[static_cast<size_t>(m - k)];
      if (!is_zero(b)) acc += Rat(k) * l_->at(k) * b;
    }
    return acc / m;
  }
  TapeNode* l_;
};

// L = -log(1 - u) = sum u^m / m over all m:
// m L(m) = m u(m) + sum_{j<m} j L(j) u(m-j).
class LogTape final : public TapeNode {
 public:
  explicit LogTape(TapeNode* u) : u_(u) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(0);
    Rat acc = Rat(m) * u_->coeff(m);
    u_->ensure(m - 1);
    for (size_t idx = 0; idx < nz_.size(); ++idx) {
      int j = nz_[idx];
      const Rat& uv = u_->at(m - j);
      if (!is_zero(uv)) acc += Rat(j) * c_[static_cast<size_t>(j)] * uv;
    }
    return acc / m;
  }
  TapeNode* u_;
};

// sum over {m : m == d0 mod s, m >= d0} of u^m / m, via
// z V' = (z u') * W with W = sum u^{m-1} over the same set.
// W(0) != 0 only when d0 = 1, which is exactly when reading u at the
// current index is legitimate.
class HarmonicApTape final : public TapeNode {
 public:
  HarmonicApTape(TapeNode* u, TapeNode* w_tape) : u_(u), w_(w_tape) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(0);
    Rat acc(0);
    w_->ensure(m - 1);
    for (int i : w_->nonzeros()) {
      if (i > m - 1) break;
      int k = m - i;
      const Rat& uv = u_->coeff(k);
      if (!is_zero(uv)) acc += Rat(k) * uv * w_->at(i);
    }
    return acc / m;
  }
  TapeNode* u_;
  TapeNode* w_;
};

// sum over an enumerated sparse index set S of weight(j) * u^j, with power
// tapes supplied on demand (exponent 0 maps to the constant 1).
class SparseWeightedSumTape final : public TapeNode {
 public:
  using Enumerate = std::function<void(long limit, const std::function<void(long)>&)>;
  using Weight = std::function<Rat(long)>;
  using PowerOf = std::function<TapeNode*(long)>;

  SparseWeightedSumTape(Enumerate en, Weight weight, PowerOf power, int u_val)
      : enumerate_(std::move(en)), weight_(std::move(weight)), power_(std::move(power)),
        u_val_(std::max(1, u_val)) {}

 private:
  Rat compute(int m) override {
    // members with exponent j contribute from index j * val(u) onwards
    while (enumerated_to_ < m) {
      long next_limit = std::max<long>(m, 2 * enumerated_to_);
      members_.clear();
      enumerate_(next_limit, [&](long j) { members_.emplace_back(j, weight_(j)); });
      enumerated_to_ = next_limit;
    }
    Rat acc(0);
    for (auto& [j, w] : members_) {
      if (j * u_val_ > m) break;
      TapeNode* p = power_(j);
      acc += w * p->coeff(m);
    }
    return acc;
  }

  Enumerate enumerate_;
  Weight weight_;
  PowerOf power_;
  int u_val_;
  long enumerated_to_ = 0;
  std::vector<std::pair<long, Rat>> members_;
};

// Restricted multiset via the cycle-index rows h_m (Newton recurrence
// m h_m = sum_k p_k h_{m-k} with p_k = u(z^k)), filled column-by-column.
// Memory is quadratic in the order, so construction is guarded.
class MSetRowsTape final : public TapeNode {
 public:
  MSetRowsTape(TapeNode* u, SpecSet m, int max_order) : u_(u), m_(std::move(m)) {
    if (max_order > 400)
      throw Error(ErrorKind::InvalidArgument,
                  "MSet/Cycle over this restriction set is supported up to order 400");
  }

 private:
  // Row 0 is [1, 0, ...], row 1 is u itself (read straight from the tape so
  // the current column of u is touched only when 1 is a member), rows >= 2
  // are stored. Row m has valuation m.
  Rat h(int row, int j) {
    if (row == 0) return Rat(j == 0 ? 1 : 0);
    if (row == 1) return u_->coeff(j);
    if (j < row) return Rat(0);
    return rows_[static_cast<size_t>(row)][static_cast<size_t>(j)];
  }

  void fill_column(int j) {
    if (static_cast<int>(rows_.size()) <= j) rows_.resize(static_cast<size_t>(j) + 1);
    if (j >= 1) u_->ensure(j - 1);  // all reads below stay <= j-1 (or <= j/2)
    for (int row = 2; row <= j; ++row) {
      auto& r = rows_[static_cast<size_t>(row)];
      r.resize(static_cast<size_t>(j) + 1);
      Rat acc(0);
      for (int k = 1; k <= row; ++k) {
        // p_k(i) = u(i/k) for k | i; h_{row-k} has valuation row-k
        int hi = row - k >= 1 ? j - (row - k) : j;
        for (int i = k; i <= hi; i += k) {
          if (row - k == 0 && i != j) continue;  // h_0 only at offset 0
          const Rat& uv = u_->coeff(i / k);      // i/k <= j-1 here unless k >= 2
          if (is_zero(uv)) continue;
          Rat hv = h(row - k, j - i);
          if (!is_zero(hv)) acc += uv * hv;
        }
      }
      r[static_cast<size_t>(j)] = acc / row;
    }
  }

  Rat compute(int m) override {
    fill_column(m);
    Rat acc(0);
    m_.for_each_member(m, [&](long row) {
      if (row <= m) acc += h(static_cast<int>(row), m);
    });
    return acc;
  }

  TapeNode* u_;
  SpecSet m_;
  std::vector<std::vector<Rat>> rows_;
};

// MSet over all m >= 1 (Cayley/Polya form): exp(sum_k u(z^k)/k) - 1.
// The k >= 2 part of L reads strictly backwards.
class DirichletTape final : public TapeNode {
 public:
  explicit DirichletTape(TapeNode* u, bool signed_filter) : u_(u), signed_(signed_filter) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(0);
    Rat acc(0);
    for (int k = 1; k * 1 <= m; ++k) {
      if (m % k != 0) continue;
      Rat term = u_->coeff(m / k) / k;
      if (signed_ && (k % 2 == 1)) acc -= term;
      else acc += term;
    }
    return acc;
  }
  TapeNode* u_;
  bool signed_;
};

// Parity-filtered multiset sums. Stores exp(L+) and exp(L-) with the +-u(m)
// term of the current column left out (it cancels in the even filter and is
// the honest passthrough in the odd one); the missing term is patched in
// once the driver has fixed u(m).
class MSetParityTape final : public TapeNode {
 public:
  // parity: 1 -> sum over odd m, 0 -> sum over even m >= 2
  MSetParityTape(TapeNode* u, TapeNode* r_plus, TapeNode* r_minus, int parity)
      : u_(u), rp_(r_plus), rm_(r_minus), parity_(parity) {}

 private:
  void patch_through(int limit) {
    while (patched_ < limit) {
      int j = ++patched_;
      const Rat& uj = u_->coeff(j);  // j < current column: safe
      e1_[static_cast<size_t>(j)] += uj;
      e2_[static_cast<size_t>(j)] -= uj;
    }
  }

  Rat compute(int m) override {
    if (m == 0) {
      e1_.push_back(Rat(1));
      e2_.push_back(Rat(1));
      return Rat(0);
    }
    patch_through(m - 1);
    // m E(m) = sum_{k=1..m} k L(k) E(m-k), with L = +-u + R; the k = m term
    // against E(0)=1 is split so that +-u(m) stays out of the stored value.
    Rat acc1(0), acc2(0);
    for (int k = 1; k < m; ++k) {
      const Rat& e1v = e1_[static_cast<size_t>(m - k)];
      const Rat& e2v = e2_[static_cast<size_t>(m - k)];
      Rat l1 = u_->coeff(k) + rp_->coeff(k);
      Rat l2 = rm_->coeff(k) - u_->coeff(k);
      if (!is_zero(l1) && !is_zero(e1v)) acc1 += Rat(k) * l1 * e1v;
      if (!is_zero(l2) && !is_zero(e2v)) acc2 += Rat(k) * l2 * e2v;
    }
    acc1 = acc1 / m + rp_->coeff(m);   // + u(m), patched later
    acc2 = acc2 / m + rm_->coeff(m);   // - u(m), patched later
    e1_.push_back(acc1);
    e2_.push_back(acc2);
    if (parity_ == 1) {
      // odd filter: (E1 - E2)/2 = (stored1 - stored2)/2 + u(m)
      Rat out = (acc1 - acc2) / 2 + u_->coeff(m);
      return out;
    }
    return (acc1 + acc2) / 2;  // even filter: the u(m) halves cancel
  }

  TapeNode* u_;
  TapeNode* rp_;  // R+ = sum_{k>=2} u(z^k)/k
  TapeNode* rm_;  // R- = sum_{k>=2} (-1)^k u(z^k)/k
  int parity_;
  std::vector<Rat> e1_, e2_;
  int patched_ = 0;
};

// The k >= 2 divisor part of the multiset exponent (optionally signed).
class DirichletTailTape final : public TapeNode {
 public:
  DirichletTailTape(TapeNode* u, bool signed_filter) : u_(u), signed_(signed_filter) {}

 private:
  Rat compute(int m) override {
    if (m == 0) return Rat(0);
    Rat acc(0);
    for (int k = 2; k <= m; ++k) {
      if (m % k != 0) continue;
      Rat term = u_->coeff(m / k) / k;
      if (signed_ && (k % 2 == 1)) acc -= term;
      else acc += term;
    }
    return acc;
  }
  TapeNode* u_;
  bool signed_;
};

// MSet over all m >= 1 with the h_1 = u row removed without reading the
// current column of u: output(m) = E_stuff(m) (+ later patch already folded).
class MSetAllMinusIdentityTape final : public TapeNode {
 public:
  MSetAllMinusIdentityTape(TapeNode* u, TapeNode* r_tail) : u_(u), r_(r_tail) {}

 private:
  void patch_through(int limit) {
    while (patched_ < limit) {
      int j = ++patched_;
      e_[static_cast<size_t>(j)] += u_->coeff(j);
    }
  }

  Rat compute(int m) override {
    if (m == 0) {
      e_.push_back(Rat(1));
      return Rat(0);
    }
    patch_through(m - 1);
    Rat acc(0);
    for (int k = 1; k < m; ++k) {
      const Rat& ev = e_[static_cast<size_t>(m - k)];
      if (is_zero(ev)) continue;
      Rat l = u_->coeff(k) + r_->coeff(k);
      if (!is_zero(l)) acc += Rat(k) * l * ev;
    }
    acc = acc / m + r_->coeff(m);  // E(m) minus its u(m) part
    e_.push_back(acc);
    return acc;  // = (E - 1 - u)(m)
  }

  TapeNode* u_;
  TapeNode* r_;
  std::vector<Rat> e_;
  int patched_ = 0;
};

}  // namespace polya::detail
