#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polya/term.hpp"

namespace polya {

// ---- retro analysis -------------------------------------------------------
//
// Retro: the n-th output coefficient reads only input coefficients 1..n-1,
// which is exactly what makes w = Theta(w) recursively solvable. Weakly
// retro: reads 1..n. The rules are structural:
//   * a product of two operators is retro because both outputs have
//     valuation >= 1, so coefficient n of the product reads factors at <= n-1;
//   * a restriction Delta_M with 1 not in M only involves powers >= 2 and
//     plethysm terms, both of which look strictly back;
//   * the m = 1 term of Delta_M / powsum / expm1 passes the argument through.

enum class RetroStatus { Retro, WeaklyRetro };

inline RetroStatus check_retro(const TermPtr& t) {
  using RS = RetroStatus;
  auto weaker = [](RS a, RS b) { return (a == RS::WeaklyRetro || b == RS::WeaklyRetro) ? RS::WeaklyRetro : RS::Retro; };
  return std::visit(
      [&](const auto& n) -> RS {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::W>) return RS::WeaklyRetro;
        else if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::Const>) return RS::Retro;
        else if constexpr (std::is_same_v<T, Term::Scale>) return check_retro(n.t);
        else if constexpr (std::is_same_v<T, Term::Add>) return weaker(check_retro(n.a), check_retro(n.b));
        else if constexpr (std::is_same_v<T, Term::Mul>) return RS::Retro;
        else if constexpr (std::is_same_v<T, Term::ComposeW>)
          return check_retro(n.outer) == RS::Retro ? RS::Retro : check_retro(n.inner);
        else if constexpr (std::is_same_v<T, Term::Std>)
          return n.m.contains_one() ? check_retro(n.arg) : RS::Retro;
        else if constexpr (std::is_same_v<T, Term::PowSum>)
          return n.m.contains_one() ? check_retro(n.arg) : RS::Retro;
        else return check_retro(n.arg);  // ExpM1: the m=1 term passes through
      },
      t->node);
}

// ---- linearity ------------------------------------------------------------
//
// The three-case algorithm: a restriction of a standard operator (or a
// nonlinear elementary builtin) with a w-leaf below it makes the term
// nonlinear; so does a product with w on or below both sides; otherwise the
// term is linear. Composition substitutes degrees.

enum class WDegree { Zero, Linear, Nonlinear };

inline WDegree w_degree(const TermPtr& t) {
  using D = WDegree;
  auto join = [](D a, D b) { return a > b ? a : b; };
  return std::visit(
      [&](const auto& n) -> D {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::W>) return D::Linear;
        else if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::Const>) return D::Zero;
        else if constexpr (std::is_same_v<T, Term::Scale>) return w_degree(n.t);
        else if constexpr (std::is_same_v<T, Term::Add>) return join(w_degree(n.a), w_degree(n.b));
        else if constexpr (std::is_same_v<T, Term::Mul>) {
          D a = w_degree(n.a), b = w_degree(n.b);
          if (a != D::Zero && b != D::Zero) return D::Nonlinear;
          return join(a, b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          D o = w_degree(n.outer), i = w_degree(n.inner);
          if (o == D::Zero || i == D::Zero) return D::Zero;
          if (o == D::Linear) return i;
          return D::Nonlinear;
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          // parser normalized M = {1} away, so any Std node is a genuine
          // restriction; a w-leaf below it is the nonlinear case
          return w_degree(n.arg) == D::Zero ? D::Zero : D::Nonlinear;
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          D a = w_degree(n.arg);
          if (a == D::Zero) return D::Zero;
          bool has_higher = !n.m.is_finite() || n.m.max_element() >= 2;
          if (has_higher) return D::Nonlinear;
          return a;  // M = {1}: c * arg
        } else {
          return w_degree(n.arg) == D::Zero ? D::Zero : D::Nonlinear;  // ExpM1
        }
      },
      t->node);
}

inline bool check_nonlinear(const TermPtr& t) { return w_degree(t) == WDegree::Nonlinear; }

// ---- boundedness witness --------------------------------------------------
//
// Propagates an exact rational R with Theta(w) dominated by A_R(z + w),
// using the witness algebra A_{R1} A_{R2} <= A_{R1+R2}, c A_R <= A_{(c+1)R},
// A_{R1} o A_{R2} <= A_{2(1+R1+R2)^2}. Standard operators applied directly
// to w carry R = 1; applied to a composite argument they go through the
// composition rule. Absence of a witness means "not provably bounded".

inline std::optional<Rat> check_bounded(const TermPtr& t) {
  using R = std::optional<Rat>;
  auto compose_rule = [](const Rat& r1, const Rat& r2) -> Rat {
    Rat s = 1 + r1 + r2;
    return Rat(2) * s * s;
  };
  return std::visit(
      [&](const auto& n) -> R {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W>) {
          return Rat(1);
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          return n.gen.growth_bound();
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          R r = check_bounded(n.t);
          if (!r) return std::nullopt;
          return (n.c + 1) * *r;
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          R a = check_bounded(n.a), b = check_bounded(n.b);
          if (!a || !b) return std::nullopt;
          return *a + *b;
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          R a = check_bounded(n.outer), b = check_bounded(n.inner);
          if (!a || !b) return std::nullopt;
          return compose_rule(*a, *b);
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          if (std::holds_alternative<Term::W>(n.arg->node)) return Rat(1);
          R a = check_bounded(n.arg);
          if (!a) return std::nullopt;
          return compose_rule(Rat(1), *a);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          if (std::holds_alternative<Term::W>(n.arg->node)) return n.c;
          R a = check_bounded(n.arg);
          if (!a) return std::nullopt;
          return compose_rule(n.c, *a);
        } else {  // ExpM1: dominated by Seq
          if (std::holds_alternative<Term::W>(n.arg->node)) return Rat(1);
          R a = check_bounded(n.arg);
          if (!a) return std::nullopt;
          return compose_rule(Rat(1), *a);
        }
      },
      t->node);
}

// ---- integrality ----------------------------------------------------------
// Maps IDOM to IDOM: all scalars and generator coefficients integral, and no
// expm1 (its 1/m! coefficients leave the integers).

inline bool check_integral(const TermPtr& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W>) return true;
        else if constexpr (std::is_same_v<T, Term::Const>) return n.gen.integral();
        else if constexpr (std::is_same_v<T, Term::Scale>) return is_integer(n.c) && check_integral(n.t);
        else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>)
          return check_integral(n.a) && check_integral(n.b);
        else if constexpr (std::is_same_v<T, Term::ComposeW>)
          return check_integral(n.outer) && check_integral(n.inner);
        else if constexpr (std::is_same_v<T, Term::Std>) return check_integral(n.arg);
        else if constexpr (std::is_same_v<T, Term::PowSum>) return is_integer(n.c) && check_integral(n.arg);
        else return false;  // ExpM1
      },
      t->node);
}

// ---- membership in O_E / O_I ----------------------------------------------

enum class MembershipKind { InOE, InOI, InONeither };

struct Membership {
  MembershipKind kind = MembershipKind::InONeither;
  std::string reason;  // first failing node, for InONeither
};

namespace detail {

// O_E: bounded open elementary operators combined by the arithmetical
// operations. Standard-operator nodes are not elementary (their plethysm
// terms are not), so they are routed through O_I; Seq_M is expressible as
// powsum(1, M, .) when the elementary route is wanted.
inline std::optional<std::string> oe_violation(const TermPtr& t) {
  using S = std::optional<std::string>;
  return std::visit(
      [](const auto& n) -> S {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          if (!n.gen.growth_bound()) return "constant series " + n.gen.to_dsl() + " is not provably bounded";
          if (!n.gen.open_as_constant())
            return "constant series " + n.gen.to_dsl() + " converges at its radius (not open)";
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return oe_violation(n.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          if (auto v = oe_violation(n.a)) return v;
          return oe_violation(n.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          if (auto v = oe_violation(n.outer)) return v;
          return oe_violation(n.inner);
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          return std::string(to_string(n.kind)) + " is not an elementary operator";
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return oe_violation(n.arg);  // diverges at its radius: bounded and open
        } else {
          return oe_violation(n.arg);  // ExpM1: entire, open
        }
      },
      t->node);
}

inline std::optional<std::string> oi_violation(const TermPtr& t) {
  using S = std::optional<std::string>;
  return std::visit(
      [](const auto& n) -> S {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Z> || std::is_same_v<T, Term::W>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Term::Const>) {
          if (!n.gen.integral()) return "constant series " + n.gen.to_dsl() + " has non-integer coefficients";
          if (!n.gen.growth_bound()) return "constant series " + n.gen.to_dsl() + " is not provably bounded";
          if (!n.gen.open_as_constant())
            return "constant series " + n.gen.to_dsl() + " converges at its radius (not open)";
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          if (!is_integer(n.c)) return "non-integral scalar " + rat_string(n.c) + " with a standard operator route";
          return oi_violation(n.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          if (auto v = oi_violation(n.a)) return v;
          return oi_violation(n.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          if (auto v = oi_violation(n.outer)) return v;
          return oi_violation(n.inner);
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          if ((n.kind == StdKind::Cycle || n.kind == StdKind::DCycle) && !n.m.is_finite() &&
              !n.m.harmonic_divergent())
            return "cycle restriction needs M finite or sum 1/m divergent";
          return oi_violation(n.arg);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          if (!is_integer(n.c)) return "non-integral powsum base " + rat_string(n.c);
          return oi_violation(n.arg);
        } else {
          return std::string("expm1 has non-integer coefficients (not an integral operator)");
        }
      },
      t->node);
}

}  // namespace detail

inline Membership check_membership(const TermPtr& t) {
  auto oe = detail::oe_violation(t);
  if (!oe) return {MembershipKind::InOE, ""};
  auto oi = detail::oi_violation(t);
  if (!oi) return {MembershipKind::InOI, ""};
  return {MembershipKind::InONeither, "not in either O_E or O_I (" + *oe + "; " + *oi + ")"};
}

// ---- the certificate ------------------------------------------------------

enum class Openness { OpenElementary, OpenForSolutionPending, NotOpen };

struct Classification {
  RetroStatus retro = RetroStatus::WeaklyRetro;  // of the whole equation
  bool nonlinear = false;                        // of Theta_1
  std::optional<Rat> bounded;                    // witness R for the whole equation
  bool integral = false;
  Openness openness = Openness::NotOpen;
  std::string openness_reason;
  Membership membership;                         // of Theta_1
};

struct CertCheck {
  std::string hypothesis;
  bool pass = false;
  std::string reason;
};

struct Certificate {
  TermPtr a_part;   // may be null when rejected before the split
  TermPtr theta1;
  std::vector<CertCheck> checks;
  bool certified = false;
  std::string rejection_reason;  // short code of the first failing check
  Classification classification;
};

namespace detail {

// A(rho_A) = infinity holds whenever every declared constant leaf diverges
// at its own radius: sums/products/compositions of nonnegative series that
// individually diverge at their radii diverge at the combined radius.
inline std::optional<std::string> convergent_leaf(const TermPtr& t) {
  using S = std::optional<std::string>;
  return std::visit(
      [](const auto& n) -> S {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Term::Const>) {
          if (!n.gen.divergent_at_radius())
            return "constant series " + n.gen.to_dsl() + " does not diverge at its radius";
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Term::Scale>) {
          return convergent_leaf(n.t);
        } else if constexpr (std::is_same_v<T, Term::Add> || std::is_same_v<T, Term::Mul>) {
          if (auto v = convergent_leaf(n.a)) return v;
          return convergent_leaf(n.b);
        } else if constexpr (std::is_same_v<T, Term::ComposeW>) {
          if (auto v = convergent_leaf(n.outer)) return v;
          return convergent_leaf(n.inner);
        } else if constexpr (std::is_same_v<T, Term::Std>) {
          return convergent_leaf(n.arg);
        } else if constexpr (std::is_same_v<T, Term::PowSum>) {
          return convergent_leaf(n.arg);
        } else if constexpr (std::is_same_v<T, Term::ExpM1>) {
          return convergent_leaf(n.arg);
        } else {
          return std::nullopt;  // Z, W
        }
      },
      t->node);
}

}  // namespace detail

// Assembles the Main-Theorem certificate: T = A(z) + Theta_1(T) with A
// nonzero and divergent at its radius, Theta_1 a nonlinear retro member of
// O_E or O_I (the integral route also needs an integral A). Rejection is a
// value, not an error.
inline Certificate certify(const TermPtr& t) {
  Certificate cert;
  auto fail = [&](const std::string& name, const std::string& code, const std::string& reason) {
    cert.checks.push_back({name, false, reason});
    if (cert.rejection_reason.empty()) cert.rejection_reason = code;
  };
  auto pass = [&](const std::string& name, const std::string& note = "") {
    cert.checks.push_back({name, true, note});
  };

  cert.classification.retro = check_retro(t);
  cert.classification.bounded = check_bounded(t);
  cert.classification.integral = check_integral(t);

  SplitResult split;
  try {
    split = split_constant_part(t);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoConstantPart) throw;
    fail("constant_part_exists", "no_constant_part", "every summand mentions w");
    cert.classification.membership = {MembershipKind::InONeither, "no constant part"};
    return cert;
  }
  cert.a_part = split.constant_part;
  pass("constant_part_exists");

  if (!split.theta1) {
    fail("theta1_nonlinear", "linear", "the equation has no w-dependent part");
    return cert;
  }
  cert.theta1 = split.theta1;

  if (auto bad = detail::convergent_leaf(split.constant_part))
    fail("A_divergent_at_radius", "constant_part_convergent", *bad);
  else
    pass("A_divergent_at_radius");

  if (check_retro(split.theta1) == RetroStatus::Retro)
    pass("theta1_retro");
  else
    fail("theta1_retro", "not_retro", "Theta_1 reads the current coefficient");

  if (cert.classification.retro == RetroStatus::Retro)
    pass("whole_term_retro");
  else
    fail("whole_term_retro", "not_retro", "the equation reads the current coefficient");

  cert.classification.nonlinear = check_nonlinear(split.theta1);
  if (cert.classification.nonlinear)
    pass("theta1_nonlinear");
  else
    fail("theta1_nonlinear", "linear", "Theta_1 is linear in w");

  Membership mem = check_membership(split.theta1);
  cert.classification.membership = mem;
  switch (mem.kind) {
    case MembershipKind::InOE:
      pass("theta1_membership", "O_E");
      cert.classification.openness = Openness::OpenElementary;
      break;
    case MembershipKind::InOI:
      if (!check_integral(split.constant_part)) {
        fail("theta1_membership", "membership: integral route requires an integral constant part",
             "Theta_1 is in O_I but A(z) is not integral");
        cert.classification.openness = Openness::NotOpen;
        cert.classification.openness_reason = "integral route with non-integral constant part";
      } else {
        pass("theta1_membership", "O_I");
        cert.classification.openness = Openness::OpenForSolutionPending;
        cert.classification.openness_reason =
            "openness for the solution follows once Theta(T)(rho) is observed finite";
      }
      break;
    case MembershipKind::InONeither:
      fail("theta1_membership", "membership: " + mem.reason, mem.reason);
      cert.classification.openness = Openness::NotOpen;
      cert.classification.openness_reason = mem.reason;
      break;
  }

  if (cert.classification.bounded)
    pass("bounded_witness", "R = " + rat_string(*cert.classification.bounded));
  else
    fail("bounded_witness", "unbounded", "no boundedness witness");

  cert.certified = cert.rejection_reason.empty();
  return cert;
}

}  // namespace polya
