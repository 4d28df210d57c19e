#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "polya/series.hpp"
#include "polya/specset.hpp"

namespace polya {

// Radius behaviour a declared constant series commits to; certification
// reads A(rho_A) = infinity off this class instead of analyzing coefficients.
enum class RadiusClass {
  Polynomial,        // finite support, rho = inf, diverges at inf (if nonzero)
  Entire,            // rho = inf, diverges at inf
  FiniteDivergent,   // 0 < rho < inf, A(rho) = inf
  FiniteConvergent,  // 0 < rho < inf, A(rho) < inf
  ZeroRadius,
};

// Declared closed-form coefficient rule for constant series in equations.
class Generator {
 public:
  enum class Kind { Poly, Geometric, ExpSeries, UserList };

  static Generator poly(std::vector<Rat> coeffs_from_1) {
    bool nonzero = false;
    for (const auto& c : coeffs_from_1) {
      if (is_negative(c)) throw Error(ErrorKind::NegativeCoefficient, "poly coefficient");
      if (!is_zero(c)) nonzero = true;
    }
    if (!nonzero) throw Error(ErrorKind::InvalidArgument, "zero polynomial generator");
    Generator g;
    g.kind_ = Kind::Poly;
    g.coeffs_ = std::move(coeffs_from_1);
    g.rclass_ = RadiusClass::Polynomial;
    Rat bound = 1;
    for (const auto& c : g.coeffs_) bound = std::max(bound, c);
    g.growth_bound_ = bound;
    return g;
  }

  static Generator geometric(Rat ratio) {
    if (sgn(ratio) <= 0) throw Error(ErrorKind::InvalidArgument, "geom ratio must be positive");
    Generator g;
    g.kind_ = Kind::Geometric;
    g.ratio_ = std::move(ratio);
    g.rclass_ = RadiusClass::FiniteDivergent;
    g.growth_bound_ = g.ratio_;
    return g;
  }

  static Generator exp_series() {  // sum_{n>=1} z^n / n!
    Generator g;
    g.kind_ = Kind::ExpSeries;
    g.rclass_ = RadiusClass::Entire;
    g.growth_bound_ = Rat(1);
    return g;
  }

  static Generator user_list(std::vector<Rat> coeffs_from_1, RadiusClass rclass,
                             std::optional<Rat> growth_bound = std::nullopt) {
    for (const auto& c : coeffs_from_1)
      if (is_negative(c)) throw Error(ErrorKind::NegativeCoefficient, "user coefficient");
    Generator g;
    g.kind_ = Kind::UserList;
    g.coeffs_ = std::move(coeffs_from_1);
    g.rclass_ = rclass;
    g.growth_bound_ = std::move(growth_bound);
    return g;
  }

  Kind kind() const { return kind_; }
  RadiusClass radius_class() const { return rclass_; }

  Rat coeff(long n) const {
    if (n < 1) return Rat(0);
    switch (kind_) {
      case Kind::Poly:
      case Kind::UserList:
        return n <= static_cast<long>(coeffs_.size()) ? coeffs_[static_cast<size_t>(n - 1)] : Rat(0);
      case Kind::Geometric:
        return rat_pow(ratio_, static_cast<unsigned long>(n));
      case Kind::ExpSeries: {
        Rat r(1);
        r /= Rat(factorial(static_cast<unsigned long>(n)));
        return r;
      }
    }
    return Rat(0);
  }

  Series prefix(int order) const {
    Series s(order);
    if (kind_ == Kind::Geometric) {
      Rat p = 1;
      for (int n = 1; n <= order; ++n) {
        p *= ratio_;
        s.set(n, p);
      }
      return s;
    }
    for (int n = 1; n <= order; ++n) {
      Rat c = coeff(n);
      if (!is_zero(c)) s.set(n, c);
    }
    return s;
  }

  // A(rho_A) = infinity, with rho = infinity counting (nonzero series
  // diverge at infinity). This is the Main-Theorem qualification for the
  // constant part.
  bool divergent_at_radius() const {
    switch (rclass_) {
      case RadiusClass::Polynomial:
      case RadiusClass::Entire:
      case RadiusClass::FiniteDivergent:
        return true;
      case RadiusClass::FiniteConvergent:
      case RadiusClass::ZeroRadius:
        return false;
    }
    return false;
  }

  // open as an operator: rho_A > 0 implies A(rho_A) = inf (vacuous at rho 0)
  bool open_as_constant() const {
    return divergent_at_radius() || rclass_ == RadiusClass::ZeroRadius;
  }

  // witness R with A dominated by A_R; absent means not provably bounded
  std::optional<Rat> growth_bound() const {
    if (rclass_ == RadiusClass::ZeroRadius) return std::nullopt;
    return growth_bound_;
  }

  bool integral() const {
    switch (kind_) {
      case Kind::Poly:
      case Kind::UserList:
        for (const auto& c : coeffs_)
          if (!is_integer(c)) return false;
        return true;
      case Kind::Geometric:
        return is_integer(ratio_);
      case Kind::ExpSeries:
        return false;
    }
    return false;
  }

  double value_at(double x) const {
    switch (kind_) {
      case Kind::Poly:
      case Kind::UserList: {
        double acc = 0.0, xp = 1.0;
        for (const auto& c : coeffs_) {
          xp *= x;
          acc += to_double(c) * xp;
        }
        return acc;
      }
      case Kind::Geometric: {
        double r = to_double(ratio_);
        if (r * x >= 1.0) return HUGE_VAL;
        return r * x / (1.0 - r * x);
      }
      case Kind::ExpSeries:
        return std::expm1(x);
    }
    return 0.0;
  }

  double derivative_at(double x) const {
    switch (kind_) {
      case Kind::Poly:
      case Kind::UserList: {
        double acc = 0.0, xp = 1.0;
        for (size_t i = 0; i < coeffs_.size(); ++i) {
          acc += static_cast<double>(i + 1) * to_double(coeffs_[i]) * xp;
          xp *= x;
        }
        return acc;
      }
      case Kind::Geometric: {
        double r = to_double(ratio_);
        if (r * x >= 1.0) return HUGE_VAL;
        double d = 1.0 - r * x;
        return r / (d * d);
      }
      case Kind::ExpSeries:
        return std::exp(x);
    }
    return 0.0;
  }

  std::string to_dsl() const {
    switch (kind_) {
      case Kind::Poly: {
        std::string out = "poly(";
        for (size_t i = 0; i < coeffs_.size(); ++i) {
          if (i) out += ",";
          out += rat_string(coeffs_[i]);
        }
        return out + ")";
      }
      case Kind::Geometric:
        return "geom(" + rat_string(ratio_) + ")";
      case Kind::ExpSeries:
        return "expm1(z)";
      case Kind::UserList:
        return "userlist(...)";  // no surface syntax; API-only
    }
    return "?";
  }

  bool operator==(const Generator& o) const {
    return kind_ == o.kind_ && coeffs_ == o.coeffs_ && ratio_ == o.ratio_ && rclass_ == o.rclass_;
  }

 private:
  Kind kind_ = Kind::Poly;
  std::vector<Rat> coeffs_;  // Poly / UserList
  Rat ratio_ = 0;            // Geometric
  RadiusClass rclass_ = RadiusClass::Polynomial;
  std::optional<Rat> growth_bound_;
};

enum class StdKind { MSet, Cycle, DCycle, Seq };

inline const char* to_string(StdKind k) {
  switch (k) {
    case StdKind::MSet: return "MSet";
    case StdKind::Cycle: return "Cycle";
    case StdKind::DCycle: return "DCycle";
    case StdKind::Seq: return "Seq";
  }
  return "?";
}

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Operator AST: composite operators over {z, w, scalars, +, *, composition,
// elementary builtins, restricted standard operators}.
struct Term {
  struct Z {};
  struct W {};
  struct Const { Generator gen; };
  struct Scale { Rat c; TermPtr t; };          // c > 0
  struct Add { TermPtr a, b; };
  struct Mul { TermPtr a, b; };
  struct ComposeW { TermPtr outer, inner; };   // outer's w-slot fed by inner
  struct Std { StdKind kind; SpecSet m; TermPtr arg; };
  struct PowSum { Rat c; SpecSet m; TermPtr arg; };  // sum_{n in M} c^n arg^n
  struct ExpM1 { TermPtr arg; };               // sum_{n>=1} arg^n / n!

  using Node = std::variant<Z, W, Const, Scale, Add, Mul, ComposeW, Std, PowSum, ExpM1>;
  Node node;

  explicit Term(Node n) : node(std::move(n)) {}
};

inline TermPtr t_z() { return std::make_shared<const Term>(Term::Node{Term::Z{}}); }
inline TermPtr t_w() { return std::make_shared<const Term>(Term::Node{Term::W{}}); }
inline TermPtr t_const(Generator g) {
  return std::make_shared<const Term>(Term::Node{Term::Const{std::move(g)}});
}
inline TermPtr t_scale(Rat c, TermPtr t) {
  if (sgn(c) <= 0) throw Error(ErrorKind::InvalidArgument, "scalar must be positive");
  if (c == 1) return t;
  if (const auto* inner = std::get_if<Term::Scale>(&t->node))
    return std::make_shared<const Term>(Term::Node{Term::Scale{c * inner->c, inner->t}});
  return std::make_shared<const Term>(Term::Node{Term::Scale{std::move(c), std::move(t)}});
}
inline TermPtr t_add(TermPtr a, TermPtr b) {
  return std::make_shared<const Term>(Term::Node{Term::Add{std::move(a), std::move(b)}});
}
inline TermPtr t_mul(TermPtr a, TermPtr b) {
  return std::make_shared<const Term>(Term::Node{Term::Mul{std::move(a), std::move(b)}});
}
inline TermPtr t_compose_w(TermPtr outer, TermPtr inner) {
  return std::make_shared<const Term>(Term::Node{Term::ComposeW{std::move(outer), std::move(inner)}});
}
// Delta_{1} is the identity operator, so M = {1} normalizes to the argument.
inline TermPtr t_std(StdKind kind, SpecSet m, TermPtr arg) {
  if (m.is_singleton_one()) return arg;
  return std::make_shared<const Term>(Term::Node{Term::Std{kind, std::move(m), std::move(arg)}});
}
inline TermPtr t_powsum(Rat c, SpecSet m, TermPtr arg) {
  if (sgn(c) <= 0) throw Error(ErrorKind::InvalidArgument, "powsum scalar must be positive");
  return std::make_shared<const Term>(Term::Node{Term::PowSum{std::move(c), std::move(m), std::move(arg)}});
}
inline TermPtr t_expm1(TermPtr arg) {
  return std::make_shared<const Term>(Term::Node{Term::ExpM1{std::move(arg)}});
}

// Whether the operator's output depends on the w input at all. A composition
// is w-dependent only if both stages are.
inline bool contains_w(const TermPtr& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::W>) return true;
        else if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::Const>) return false;
        else if constexpr (std::is_same_v<T, Term::Scale>) return contains_w(n.t);
        else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>)
          return contains_w(n.a) || contains_w(n.b);
        else if constexpr (std::is_same_v<T, Term::ComposeW>)
          return contains_w(n.outer) && contains_w(n.inner);
        else if constexpr (std::is_same_v<T, Term::Std>) return contains_w(n.arg);
        else if constexpr (std::is_same_v<T, Term::PowSum>) return contains_w(n.arg);
        else return contains_w(n.arg);  // ExpM1
      },
      t->node);
}

inline bool struct_equal(const TermPtr& x, const TermPtr& y) {
  if (x == y) return true;
  if (x->node.index() != y->node.index()) return false;
  return std::visit(
      [&](const auto& a) -> bool {
        using T = std::decay_t<decltype(a)>;
        const auto& b = std::get<T>(y->node);
        if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W>) {
          return true;
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          return a.gen == b.gen;
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return a.c == b.c && struct_equal(a.t, b.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          return struct_equal(a.a, b.a) && struct_equal(a.b, b.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          return struct_equal(a.outer, b.outer) && struct_equal(a.inner, b.inner);
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          return a.kind == b.kind && a.m == b.m && struct_equal(a.arg, b.arg);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return a.c == b.c && a.m == b.m && struct_equal(a.arg, b.arg);
        } else {
          return struct_equal(a.arg, b.arg);  // ExpM1
        }
      },
      x->node);
}

namespace detail {

inline bool atomic_for_print(const TermPtr& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        return std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W> ||
               std::is_same_v<T, Term::Const> || std::is_same_v<T, Term::Std> ||
               std::is_same_v<T, Term::PowSum> || std::is_same_v<T, Term::ExpM1>;
      },
      t->node);
}

}  // namespace detail

// Canonical surface form; parse(pretty_print(t)) is structurally t for every
// parser-producible term.
inline std::string pretty_print(const TermPtr& t) {
  auto set_prefix = [](const SpecSet& m) -> std::string {
    return m.is_all() ? "" : "[" + m.to_dsl() + "]";
  };
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z>) {
          return "z";
        } else if constexpr (std::is_same_v<T, Term::W>) {
          return "w";
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          return n.gen.to_dsl();
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          std::string body = pretty_print(n.t);
          if (!detail::atomic_for_print(n.t)) body = "(" + body + ")";
          return rat_string(n.c) + "*" + body;
        } else if constexpr (std::is_same_v<T, Term::Add>) {
          return pretty_print(n.a) + " + " + pretty_print(n.b);
        } else if constexpr (std::is_same_v<T, Term::Mul>) {
          std::string lhs = pretty_print(n.a);
          std::string rhs = pretty_print(n.b);
          // left factor may itself be a product chain; anything else is wrapped
          bool lhs_chain = std::holds_alternative<Term::Mul>(n.a->node) || detail::atomic_for_print(n.a);
          if (!lhs_chain) lhs = "(" + lhs + ")";
          if (!detail::atomic_for_print(n.b)) rhs = "(" + rhs + ")";
          return lhs + "*" + rhs;
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          std::string lhs = pretty_print(n.outer);
          std::string rhs = pretty_print(n.inner);
          if (!detail::atomic_for_print(n.outer)) lhs = "(" + lhs + ")";
          if (!detail::atomic_for_print(n.inner)) rhs = "(" + rhs + ")";
          return lhs + " @ " + rhs;
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          return std::string(to_string(n.kind)) + set_prefix(n.m) + "(" + pretty_print(n.arg) + ")";
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return "powsum(" + rat_string(n.c) + ", " + n.m.to_dsl() + ", " + pretty_print(n.arg) + ")";
        } else {
          return "expm1(" + pretty_print(n.arg) + ")";
        }
      },
      t->node);
}

// Flattens the term into summands, distributing products and scalars over
// sums at the top level so that w-free summands become visible. Argument
// positions of Std/PowSum/ExpM1 are never rewritten.
inline void collect_summands(const TermPtr& t, std::vector<TermPtr>& out) {
  if (const auto* a = std::get_if<Term::Add>(&t->node)) {
    collect_summands(a->a, out);
    collect_summands(a->b, out);
    return;
  }
  if (const auto* s = std::get_if<Term::Scale>(&t->node)) {
    std::vector<TermPtr> inner;
    collect_summands(s->t, inner);
    for (auto& x : inner) out.push_back(t_scale(s->c, std::move(x)));
    return;
  }
  if (const auto* m = std::get_if<Term::Mul>(&t->node)) {
    std::vector<TermPtr> lhs, rhs;
    collect_summands(m->a, lhs);
    collect_summands(m->b, rhs);
    if (lhs.size() > 1 || rhs.size() > 1) {
      for (const auto& x : lhs)
        for (const auto& y : rhs) out.push_back(t_mul(x, y));
      return;
    }
  }
  out.push_back(t);
}

inline std::vector<TermPtr> summands(const TermPtr& t) {
  std::vector<TermPtr> out;
  collect_summands(t, out);
  return out;
}

inline TermPtr sum_of(const std::vector<TermPtr>& parts) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "empty sum");
  TermPtr acc = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) acc = t_add(acc, parts[i]);
  return acc;
}

struct SplitResult {
  TermPtr constant_part;  // A(z): sum of the w-free summands
  TermPtr theta1;         // the rest
  std::vector<TermPtr> constant_summands;
  std::vector<TermPtr> theta_summands;
};

// T = A(z) + Theta_1(T) decomposition of the Main Theorem.
inline SplitResult split_constant_part(const TermPtr& t) {
  SplitResult r;
  for (auto& s : summands(t)) {
    if (contains_w(s))
      r.theta_summands.push_back(std::move(s));
    else
      r.constant_summands.push_back(std::move(s));
  }
  if (r.constant_summands.empty())
    throw Error(ErrorKind::NoConstantPart, "every summand mentions w");
  r.constant_part = sum_of(r.constant_summands);
  if (!r.theta_summands.empty()) r.theta1 = sum_of(r.theta_summands);
  return r;
}

}  // namespace polya
