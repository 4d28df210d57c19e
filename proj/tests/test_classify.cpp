#include <catch2/catch_amalgamated.hpp>

#include "polya/classify.hpp"
#include "polya/parser.hpp"

using namespace polya;

TEST_CASE("check_nonlinear three-case algorithm") {
  CHECK(!check_nonlinear(parse("z + z*w")));
  CHECK(check_nonlinear(parse("z + z*w^2")));
  CHECK(check_nonlinear(parse("z + z*MSet[{2}](w)")));
  CHECK(check_nonlinear(parse("z + z*Seq(w)")));
  CHECK(check_nonlinear(parse("expm1(w)")));
  CHECK(!check_nonlinear(parse("powsum(3, {1}, w)")));   // c*w
  CHECK(check_nonlinear(parse("powsum(3, odd, w)")));
  CHECK(!check_nonlinear(parse("z + z*MSet_2(z)")));     // no w below the restriction
  CHECK(!check_nonlinear(parse("z + w")));
  // composition substitutes degrees
  CHECK(check_nonlinear(parse("Seq(w) @ MSet_2(w)")));
  CHECK(!check_nonlinear(parse("MSet_2(w) @ MSet_2(z)")));  // inner w-free
  CHECK(!check_nonlinear(parse("powsum(1,{1},w) @ w")));    // identity o identity
}

TEST_CASE("check_retro") {
  CHECK(check_retro(parse("w")) == RetroStatus::WeaklyRetro);
  CHECK(check_retro(parse("z + z*Seq(w)")) == RetroStatus::Retro);
  CHECK(check_retro(parse("z + MSet[{1}](w)")) == RetroStatus::WeaklyRetro);  // z + w
  CHECK(check_retro(parse("z + MSet_2(w)")) == RetroStatus::Retro);           // 1 not in M
  CHECK(check_retro(parse("z + Seq(w)")) == RetroStatus::WeaklyRetro);        // 1 in M
  CHECK(check_retro(parse("z + expm1(w)")) == RetroStatus::WeaklyRetro);
  CHECK(check_retro(parse("z + z*expm1(w)")) == RetroStatus::Retro);
  CHECK(check_retro(parse("w*w")) == RetroStatus::Retro);  // products look strictly back
  CHECK(check_retro(parse("z + powsum(2, even, w)")) == RetroStatus::Retro);
}

TEST_CASE("check_bounded witnesses") {
  auto r = check_bounded(parse("z + z*Seq(w)"));
  REQUIRE(r.has_value());
  CHECK(*r == 3);  // Add(z -> 1, Mul(z -> 1, Seq(w) -> 1))

  auto r2 = check_bounded(parse("Seq(w)"));
  REQUIRE(r2.has_value());
  CHECK(*r2 == 1);

  auto r3 = check_bounded(parse("powsum(6, odd, w)"));
  REQUIRE(r3.has_value());
  CHECK(*r3 == 6);

  // declared zero-radius user series has no witness
  TermPtr bad = t_add(t_z(), t_const(Generator::user_list({rat(1)}, RadiusClass::ZeroRadius)));
  CHECK(!check_bounded(bad).has_value());
}

TEST_CASE("check_integral") {
  CHECK(check_integral(parse("z + z*MSet(w)")));
  CHECK(check_integral(parse("z + 2*z*Seq(w)")));
  CHECK(!check_integral(parse("z + 1/2*z*w")));
  CHECK(!check_integral(parse("z + z*expm1(w)")));
  CHECK(!check_integral(parse("z + geom(1/3)*w")));
  CHECK(check_integral(parse("z + geom(2)*w")));
}

TEST_CASE("check_membership") {
  CHECK(check_membership(parse("z + z*w^2")).kind == MembershipKind::InOE);
  CHECK(check_membership(parse("z + z*MSet(w)")).kind == MembershipKind::InOI);
  CHECK(check_membership(parse("z + z*expm1(w)")).kind == MembershipKind::InOE);
  CHECK(check_membership(parse("powsum(6, odd, w)")).kind == MembershipKind::InOE);

  auto m = check_membership(parse("1/2*z*MSet[{2}](w)"));
  CHECK(m.kind == MembershipKind::InONeither);
  CHECK(m.reason.find("not in either O_E or O_I") != std::string::npos);

  // mixing expm1 under a standard operator forces neither
  CHECK(check_membership(parse("MSet_2(expm1(w))")).kind == MembershipKind::InONeither);
}

TEST_CASE("certify: planar binary is Certified through O_E") {
  Certificate c = certify(parse("w = z + z*w^2"));
  CHECK(c.certified);
  CHECK(c.classification.membership.kind == MembershipKind::InOE);
  CHECK(c.classification.openness == Openness::OpenElementary);
  CHECK(c.classification.nonlinear);
  CHECK(c.classification.retro == RetroStatus::Retro);
  REQUIRE(c.a_part != nullptr);
  CHECK(struct_equal(c.a_part, t_z()));
}

TEST_CASE("certify: the showcase equation goes through O_I") {
  Certificate c = certify(parse(
      "w = z + z*MSet(Seq(powsum(6, odd, w))) * (powsum(2, even, DCycle[primes](w)) + "
      "powsum(1, even, DCycle[primes](w)))"));
  CHECK(c.certified);
  CHECK(c.classification.membership.kind == MembershipKind::InOI);
  CHECK(c.classification.openness == Openness::OpenForSolutionPending);
  CHECK(c.classification.integral);
}

TEST_CASE("certify rejections") {
  Certificate lin = certify(parse("w = z + z*w"));
  CHECK(!lin.certified);
  CHECK(lin.rejection_reason == "linear");

  Certificate mem = certify(parse("w = (1/2)*z*(poly(1) + MSet[{2}](w))"));
  CHECK(!mem.certified);
  CHECK(mem.rejection_reason.find("not in either O_E or O_I") != std::string::npos);
  // still retro, so the coefficients remain computable downstream
  CHECK(check_retro(parse("(1/2)*z*(poly(1) + MSet[{2}](w))")) == RetroStatus::Retro);

  Certificate nocp = certify(parse("z*w"));
  CHECK(!nocp.certified);
  CHECK(nocp.rejection_reason == "no_constant_part");

  // convergent-at-radius constant part
  TermPtr conv = t_add(t_const(Generator::user_list({rat(1), rat(1)}, RadiusClass::FiniteConvergent, rat(2))),
                       t_mul(t_z(), t_mul(t_w(), t_w())));
  Certificate cc = certify(conv);
  CHECK(!cc.certified);
  CHECK(cc.rejection_reason == "constant_part_convergent");

  // weakly retro whole term
  Certificate wr = certify(parse("z + Seq(w)"));
  CHECK(!wr.certified);
  CHECK(wr.rejection_reason == "not_retro");
}

TEST_CASE("certify table-1 style corpus") {
  for (const char* eq : {"w = z + z*Seq(w)", "w = z + z*MSet(w)", "w = z + z*MSet[{2,3}](w)",
                         "w = z + z*Seq_2(w)", "w = z + z*MSet_2(w)", "w = z + z*expm1(w)",
                         "w = z + z*(w + MSet_2(w))", "w = z + z*MSet_5(w)",
                         "w = 3*z + 3*z*Seq(w)"}) {
    INFO(eq);
    CHECK(certify(parse(eq)).certified);
  }
  CHECK(!certify(parse("w = z + z*w")).certified);
}
