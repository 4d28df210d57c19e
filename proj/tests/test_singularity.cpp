#include <catch2/catch_amalgamated.hpp>

#include "polya/parser.hpp"
#include "polya/singularity.hpp"
#include "test_helpers.hpp"

using namespace polya;
using testutil::Rng;

namespace {

CharSolution char_point(const char* eq, int order) {
  TermPtr t = parse(eq);
  auto sol = solve(t, order);
  PreparedEquation prep(t, sol);
  CharOptions opt;
  opt.integral = check_integral(t);
  opt.has_plethysm = term_has_plethysm(t);
  return find_char_point(prep, sol, opt);
}

}  // namespace

TEST_CASE("eval_jet on the planar-binary representative") {
  TermPtr t = parse("z + z*w^2");
  auto sol = solve(t, 32);
  Jet2 j = eval_jet(t, sol, 0.5, 1.0);
  CHECK(j.v == Catch::Approx(1.0));
  CHECK(j.dz == Catch::Approx(2.0));
  CHECK(j.dw == Catch::Approx(1.0));
  CHECK(j.dww == Catch::Approx(1.0));

  Jet2 j0 = eval_jet(t, sol, 0.0, 0.0);
  CHECK(j0.v == 0.0);
  CHECK(j0.dz == Catch::Approx(1.0));
  CHECK(j0.dw == 0.0);
  CHECK(j0.dww == 0.0);
}

TEST_CASE("jets match centered finite differences on the corpus") {
  const std::vector<std::string> corpus = {
      "z + z*w^2", "z + z*Seq(w)", "z + z*MSet(w)", "z + z*expm1(w)",
      "z + z*MSet_2(w)", "z + z*(w + MSet_2(w))", "z + z*Cycle(w)", "z + z*DCycle[odd](w)"};
  Rng rng(8080);
  const double h = 1e-5;
  for (const auto& eq : corpus) {
    TermPtr t = parse(eq);
    auto sol = solve(t, 200);
    PreparedEquation prep(t, sol);
    int checked = 0;
    for (int trial = 0; checked < 20 && trial < 200; ++trial) {
      double x = 0.05 + 0.25 * (rng.range(0, 1000) / 1000.0);
      double y = 0.05 + 0.60 * (rng.range(0, 1000) / 1000.0);
      Jet2 j;
      double vpx, vmx, vpy, vmy;
      try {
        j = prep.eval(x, y).jet;
        vpx = prep.eval(x + h, y).jet.v;
        vmx = prep.eval(x - h, y).jet.v;
        vpy = prep.eval(x, y + h).jet.v;
        vmy = prep.eval(x, y - h).jet.v;
      } catch (const Error&) {
        continue;  // outside the convergence region; pick another point
      }
      ++checked;
      double fd_z = (vpx - vmx) / (2 * h);
      double fd_w = (vpy - vmy) / (2 * h);
      double fd_ww = (vpy - 2 * j.v + vmy) / (h * h);
      INFO(eq << " at (" << x << ", " << y << ")");
      CHECK(std::fabs(fd_z - j.dz) <= 1e-5 * std::max(1.0, std::fabs(j.dz)));
      CHECK(std::fabs(fd_w - j.dw) <= 1e-5 * std::max(1.0, std::fabs(j.dw)));
      CHECK(std::fabs(fd_ww - j.dww) <= 2e-5 * std::max(1.0, std::fabs(j.dww)));
    }
    REQUIRE(checked == 20);
  }
}

TEST_CASE("characteristic point: planar binary") {
  CharSolution s = char_point("z + z*w^2", 128);
  CHECK(std::fabs(s.rho - 0.5) < 1e-10);
  CHECK(std::fabs(s.tau - 1.0) < 1e-8);
  CHECK(s.Ez == Catch::Approx(2.0).epsilon(1e-8));
  CHECK(s.Eww == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(s.resid_value < 1e-8);
  CHECK(s.resid_deriv < 1e-8);
}

TEST_CASE("characteristic point: planar trees") {
  CharSolution s = char_point("z + z*Seq(w)", 200);
  CHECK(std::fabs(s.rho - 0.25) < 1e-9);
  CHECK(std::fabs(s.tau - 0.5) < 1e-7);
}

TEST_CASE("characteristic point: labelled trees at 1/e") {
  CharSolution s = char_point("z + z*expm1(w)", 200);
  CHECK(std::fabs(s.rho - std::exp(-1.0)) < 1e-8);
  CHECK(std::fabs(s.tau - 1.0) < 1e-6);
}

TEST_CASE("asymptotic constants on closed-form cases") {
  PeriodInfo p2{1, 2, 10, PeriodInfo::Exactness::ProvedStable};
  CharSolution bin = char_point("z + z*w^2", 128);
  AsymptoticLaw law = asymptotic_constant(bin, p2);
  CHECK(law.C == Catch::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-7));

  PeriodInfo p1{1, 1, 10, PeriodInfo::Exactness::ProvedStable};
  CharSolution pl = char_point("z + z*Seq(w)", 200);
  CHECK(asymptotic_constant(pl, p1).C ==
        Catch::Approx(1.0 / (4.0 * std::sqrt(M_PI))).epsilon(1e-6));

  CharSolution lab = char_point("z + z*expm1(w)", 200);
  CHECK(asymptotic_constant(lab, p1).C ==
        Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-5));
}

TEST_CASE("sub-criticality monotonicity of E_w along the solution") {
  TermPtr t = parse("z + z*MSet(w)");
  auto sol = solve(t, 256);
  PreparedEquation prep(t, sol);
  CharOptions opt;
  opt.integral = true;
  opt.has_plethysm = true;
  CharSolution s = find_char_point(prep, sol, opt);
  double prev = -1.0;
  for (int i = 1; i <= 12; ++i) {
    double x = s.rho * i / 13.0;
    auto ev = eval_real(sol.series, x);
    Jet2 j = prep.eval(x, ev.value).jet;
    CHECK(j.dw >= prev - 1e-12);
    prev = j.dw;
  }
  CHECK(prev <= 1.0 + 1e-9);
}

TEST_CASE("consistency: tau against the series evaluation (one-sided at rho)") {
  for (const char* eq : {"z + z*w^2", "z + z*MSet(w)"}) {
    CharSolution s = char_point(eq, 400);
    TermPtr t = parse(eq);
    auto sol = solve(t, 400);
    auto ev = eval_real(sol.series, s.rho);
    // the prefix sum is a lower bound on T(rho); the tail bound at x = rho is
    // +inf by construction, so only the one-sided comparison is meaningful
    CHECK(ev.value <= s.tau * (1.0 + 1e-6) + 1e-6);
    if (!std::isinf(ev.tail_bound)) CHECK(std::fabs(ev.value - s.tau) <= ev.tail_bound + 1e-6);
  }
}

TEST_CASE("certified corpus yields finite characteristic data downstream") {
  for (const char* eq : {"z + z*MSet(w)", "z + z*MSet[{2,3}](w)", "z + z*MSet_2(w)",
                         "z + z*Seq_2(w)", "z + z*(w + MSet_2(w))", "3*z + 3*z*Seq(w)"}) {
    INFO(eq);
    CharSolution s = char_point(eq, 256);
    CHECK(std::isfinite(s.rho));
    CHECK(s.rho > 0.0);
    CHECK(std::isfinite(s.tau));
    CHECK(s.Ez > 0.0);
    CHECK(s.Eww > 0.0);
  }
}

TEST_CASE("degenerate second derivative is reported") {
  PeriodInfo p{1, 1, 10, PeriodInfo::Exactness::ProvedStable};
  CharSolution s;
  s.rho = 0.5;
  s.Ez = 1.0;
  s.Eww = 0.0;
  CHECK_THROWS_AS(asymptotic_constant(s, p), Error);
}
