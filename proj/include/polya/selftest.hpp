#pragma once

// The acceptance suite: one row per criterion, each runnable standalone and
// printed as a single pass/fail line. The CLI `selftest` subcommand and the
// acceptance test binary both drive this runner.

#include <chrono>
#include <functional>
#include <optional>
#include <sstream>

#include "polya/pipeline.hpp"

namespace polya {

struct AcceptanceRow {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestConfig {
  std::optional<int> forced_order;  // degraded mode: run at this order, skip rows that need more
  double tol = 1e-8;
  double fit_threshold = 0.05;
};

namespace selftest_detail {

inline constexpr double kSqrt2OverPi = 0.7978845608028654;     // sqrt(2/pi)
inline constexpr double kQuarterInvSqrtPi = 0.141047395886939; // 1/(4 sqrt(pi))
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;      // 1/sqrt(2 pi)

class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed) {}
  uint64_t next() {
    s_ = s_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return s_ >> 33;
  }
  int range(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1)); }

 private:
  uint64_t s_;
};

inline Series random_series(Rng& rng, int order) {
  Series s(order);
  for (int n = 1; n <= order; ++n) s.set(n, rat(rng.range(0, 4), rng.range(1, 3)));
  return s;
}

// Z(S_m, p_1..p_m) by direct partition expansion, independent of the engine.
inline Series zsym_partition(int m, const std::vector<Series>& p, int order) {
  Series acc(order);
  std::vector<int> mult(static_cast<size_t>(m) + 1, 0);
  std::function<void(int, int)> rec = [&](int rem, int max_part) {
    if (rem == 0) {
      Rat coef(1);
      Series prod(order);
      bool first = true;
      for (int k = 1; k <= m; ++k) {
        for (int c = 0; c < mult[static_cast<size_t>(k)]; ++c) {
          prod = first ? p[static_cast<size_t>(k)] : mul(prod, p[static_cast<size_t>(k)]);
          first = false;
        }
        if (mult[static_cast<size_t>(k)]) {
          coef /= rat_pow(Rat(k), static_cast<unsigned long>(mult[static_cast<size_t>(k)]));
          coef /= Rat(factorial(static_cast<unsigned long>(mult[static_cast<size_t>(k)])));
        }
      }
      acc = add(acc, scale(coef, prod));
      return;
    }
    for (int k = std::min(rem, max_part); k >= 1; --k) {
      mult[static_cast<size_t>(k)]++;
      rec(rem - k, k);
      mult[static_cast<size_t>(k)]--;
    }
  };
  rec(m, m);
  return acc;
}

struct RowTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace selftest_detail

inline std::vector<AcceptanceRow> run_acceptance(const SelftestConfig& cfg = {}) {
  namespace sd = selftest_detail;
  std::vector<AcceptanceRow> rows;

  // a forced order only caps the rows (degraded mode); criteria that need
  // more are skipped, never run above their natural order
  auto run_row = [&](const std::string& name, int needed_order,
                     const std::function<std::string(int)>& body) {
    AcceptanceRow row;
    row.name = name;
    if (cfg.forced_order && *cfg.forced_order < needed_order) {
      row.skipped = true;
      row.detail = "needs order " + std::to_string(needed_order) + ", forced " +
                   std::to_string(*cfg.forced_order);
      rows.push_back(row);
      return;
    }
    sd::RowTimer timer;
    try {
      row.detail = body(needed_order);
      row.pass = true;
    } catch (const std::exception& e) {
      row.pass = false;
      row.detail = e.what();
    }
    row.seconds = timer.elapsed();
    rows.push_back(row);
  };

  auto fail_unless = [](bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
  };
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };

  // 1. planar binary trees
  run_row("1 planar binary: rho=1/2, T(rho)=1, d=1 q=2, C=sqrt(2/pi), t(2n)=0, <5s @N=1201",
          1201, [&](int order) {
            sd::RowTimer timer;
            RunConfig rc;
            rc.order = order;
            rc.tol = cfg.tol;
            rc.fit_threshold = cfg.fit_threshold;
            auto rep = analyze_text("w = z + z*w^2", rc);
            double secs = timer.elapsed();
            fail_unless(rep.char_solution.has_value(), "no characteristic point");
            fail_unless(std::fabs(rep.char_solution->rho - 0.5) < 1e-9, "rho off: " + fmt(rep.char_solution->rho));
            fail_unless(std::fabs(rep.char_solution->tau - 1.0) < 1e-6, "tau off: " + fmt(rep.char_solution->tau));
            fail_unless(rep.period->d == 1 && rep.period->q == 2, "(d,q) off");
            fail_unless(std::fabs(rep.law->C - sd::kSqrt2OverPi) < 1e-6, "C off: " + fmt(rep.law->C));
            for (int n = 2; n <= order; n += 2)
              fail_unless(is_zero(rep.solution->series.at(n)), "t(2n) != 0");
            // the odd-index coefficients are exactly the Catalan numbers
            IntSeries cat = catalan_prefix((order + 1) / 2);
            for (int k = 1; 2 * k - 1 <= order; ++k)
              fail_unless(rep.solution->series.at(2 * k - 1) == cat.series.at(k),
                          "t(2k-1) != Catalan(k-1) at k=" + std::to_string(k));
            fail_unless(secs < 5.0, "runtime " + fmt(secs) + "s >= 5s");
            return "rho=" + fmt(rep.char_solution->rho) + " C=" + fmt(rep.law->C) + " in " + fmt(secs) + "s";
          });

  // 2. planar trees
  run_row("2 planar: Catalan-exact to 600, rho=1/4, q=1, C=1/(4 sqrt(pi)), fit<0.02", 600,
          [&](int order) {
            RunConfig rc;
            rc.order = order;
            rc.tol = cfg.tol;
            rc.fit_threshold = 0.02;
            auto rep = analyze_text("w = z + z*Seq(w)", rc);
            auto oracle = catalan_prefix(order);
            fail_unless(rep.solution->series == oracle.series, "coefficients differ from the ballot oracle");
            fail_unless(std::fabs(rep.char_solution->rho - 0.25) < 1e-9, "rho off: " + fmt(rep.char_solution->rho));
            fail_unless(rep.period->q == 1, "q off");
            fail_unless(std::fabs(rep.law->C - sd::kQuarterInvSqrtPi) < 1e-4, "C off: " + fmt(rep.law->C));
            fail_unless(rep.fit && rep.fit->relative_deviation < 0.02,
                        "fit deviation " + fmt(rep.fit ? rep.fit->relative_deviation : -1));
            return "rho=" + fmt(rep.char_solution->rho) + " C=" + fmt(rep.law->C) +
                   " fit=" + fmt(rep.fit->relative_deviation);
          });

  // 3. unlabelled rooted trees
  run_row("3 rooted trees: Euler-product-exact to 500, solver rho vs ratio <1%, fit<0.05", 500,
          [&](int order) {
            RunConfig rc;
            rc.order = order;
            rc.tol = cfg.tol;
            rc.fit_threshold = 0.05;
            auto rep = analyze_text("w = z + z*MSet(w)", rc);
            auto oracle = euler_product_prefix(order);
            fail_unless(rep.solution->series == oracle.series, "coefficients differ from the Euler-product oracle");
            fail_unless(rep.ratio_estimate.has_value(), "no ratio estimate");
            double gap = std::fabs(*rep.ratio_estimate - 1.0 / rep.char_solution->rho) * rep.char_solution->rho;
            fail_unless(gap < 0.01, "rho cross-check gap " + fmt(gap));
            fail_unless(rep.fit && rep.fit->relative_deviation < 0.05,
                        "fit deviation " + fmt(rep.fit ? rep.fit->relative_deviation : -1));
            return "1/rho=" + fmt(1.0 / rep.char_solution->rho) + " ratio=" + fmt(*rep.ratio_estimate) +
                   " fit=" + fmt(rep.fit->relative_deviation);
          });

  // 4. labelled trees
  run_row("4 labelled trees: rho=1/e, C=1/sqrt(2 pi), n! t(n) = n^{n-1} exactly to 60", 200,
          [&](int order) {
            RunConfig rc;
            rc.order = order;
            rc.tol = cfg.tol;
            auto rep = analyze_text("w = z + z*expm1(w)", rc);
            fail_unless(std::fabs(rep.char_solution->rho - std::exp(-1.0)) < 1e-8,
                        "rho off: " + fmt(rep.char_solution->rho));
            fail_unless(std::fabs(rep.law->C - sd::kInvSqrt2Pi) < 1e-4, "C off: " + fmt(rep.law->C));
            for (int n = 1; n <= 60; ++n) {
              Rat expect(int_pow(Int(n), static_cast<unsigned long>(n - 1)));
              expect /= Rat(factorial(static_cast<unsigned long>(n)));
              fail_unless(rep.solution->series.at(n) == expect, "t(" + std::to_string(n) + ") wrong");
            }
            return "rho=" + fmt(rep.char_solution->rho) + " C=" + fmt(rep.law->C);
          });

  // 5. rejections
  run_row("5 rejections: linear -> Rejected(linear); half-multiset -> membership, ratio>0.9 @N=1500",
          1500, [&](int order) {
            RunConfig rc;
            rc.order = 64;
            auto lin = analyze_text("w = z + z*w", rc);
            fail_unless(!lin.certificate.certified && lin.certificate.rejection_reason == "linear",
                        "linear rejection missing");
            fail_unless(lin.exit_code == 2, "exit code for rejection");

            rc.order = order;
            auto mem = analyze_text("w = (1/2)*z*(poly(1) + MSet[{2}](w))", rc);
            fail_unless(!mem.certificate.certified, "should be rejected");
            fail_unless(mem.certificate.rejection_reason.find("not in either O_E or O_I") !=
                            std::string::npos,
                        "membership reason missing: " + mem.certificate.rejection_reason);
            fail_unless(mem.ratio_estimate.has_value(), "ratio estimate missing");
            fail_unless(*mem.ratio_estimate > 0.9, "ratio estimate " + fmt(*mem.ratio_estimate));
            return "membership reason ok, ratio=" + fmt(*mem.ratio_estimate);
          });

  // 6. the showcase equation
  run_row("6 showcase equation: certified via O_I, finite (rho, tau, C), congruence exact", 240,
          [&](int order) {
            RunConfig rc;
            rc.order = order;
            rc.tol = cfg.tol;
            auto rep = analyze_text(
                "w = z + z*MSet(Seq(powsum(6, odd, w))) * (powsum(2, even, DCycle[primes](w)) + "
                "powsum(1, even, DCycle[primes](w)))",
                rc);
            fail_unless(rep.certificate.certified, "not certified");
            fail_unless(rep.certificate.classification.membership.kind == MembershipKind::InOI,
                        "not via O_I");
            fail_unless(rep.char_solution.has_value(), "no characteristic point");
            fail_unless(std::isfinite(rep.char_solution->rho) && rep.char_solution->rho > 0, "rho");
            fail_unless(std::isfinite(rep.char_solution->tau), "tau");
            fail_unless(rep.law && std::isfinite(rep.law->C) && rep.law->C > 0, "C");
            const Series& s = rep.solution->series;
            for (int n = 1; n <= s.order(); ++n)
              if (!is_zero(s.at(n)))
                fail_unless((n - rep.period->d) % rep.period->q == 0, "congruence violated");
            return "rho=" + fmt(rep.char_solution->rho) + " tau=" + fmt(rep.char_solution->tau) +
                   " C=" + fmt(rep.law->C) + " d=" + std::to_string(rep.period->d) + " q=" +
                   std::to_string(rep.period->q);
          });

  // 7. property suites (no corpus numerics required)
  run_row("7 property suites: series laws, dominance, jets vs FD, MSet rows, fixpoint, (d,q)", 200,
          [&](int) {
            sd::Rng rng(20260810);
            // series algebra laws
            for (int trial = 0; trial < 10; ++trial) {
              Series a = sd::random_series(rng, 12), b = sd::random_series(rng, 12),
                     c = sd::random_series(rng, 12);
              fail_unless(mul(a, b) == mul(b, a), "mul commutativity");
              fail_unless(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)), "distributivity");
              Series big = b;
              for (int n = 1; n <= 12; ++n) big.set(n, b.at(n) + 1);
              fail_unless(dominates(mul(a, b), mul(a, big)), "dominance preservation");
            }
            // jets vs centered finite differences: 20 points x 6 corpus equations
            const char* corpus[6] = {"z + z*w^2",      "z + z*Seq(w)",        "z + z*MSet(w)",
                                     "z + z*expm1(w)", "z + z*MSet_2(w)",     "z + z*(w + MSet_2(w))"};
            for (const char* eq : corpus) {
              TermPtr t = parse(eq);
              auto sol = solve(t, 200);
              PreparedEquation prep(t, sol);
              const double h = 1e-5;
              int done = 0;
              for (int trial = 0; done < 20 && trial < 200; ++trial) {
                double x = 0.05 + 0.25 * (rng.range(0, 1000) / 1000.0);
                double y = 0.05 + 0.6 * (rng.range(0, 1000) / 1000.0);
                Jet2 j;
                double vpx, vmx, vpy, vmy;
                try {
                  j = prep.eval(x, y).jet;
                  vpx = prep.eval(x + h, y).jet.v;
                  vmx = prep.eval(x - h, y).jet.v;
                  vpy = prep.eval(x, y + h).jet.v;
                  vmy = prep.eval(x, y - h).jet.v;
                } catch (const Error&) {
                  continue;
                }
                ++done;
                fail_unless(std::fabs((vpx - vmx) / (2 * h) - j.dz) <= 1e-5 * std::max(1.0, std::fabs(j.dz)),
                            std::string("dz mismatch for ") + eq);
                fail_unless(std::fabs((vpy - vmy) / (2 * h) - j.dw) <= 1e-5 * std::max(1.0, std::fabs(j.dw)),
                            std::string("dw mismatch for ") + eq);
                fail_unless(std::fabs((vpy - 2 * j.v + vmy) / (h * h) - j.dww) <=
                                2e-5 * std::max(1.0, std::fabs(j.dww)),
                            std::string("dww mismatch for ") + eq);
              }
              fail_unless(done == 20, "not enough admissible jet sample points");
            }
            // MSet Newton recurrence vs partition expansion, m <= 6
            for (int m = 1; m <= 6; ++m) {
              Series input = sd::random_series(rng, 12);
              if (input.first_nonzero() == 0) input.set(1, Rat(1));
              std::vector<Series> p;
              p.push_back(Series(12));
              for (int k = 1; k <= 12; ++k) p.push_back(substitute_power(input, k));
              Series via_engine =
                  apply_operator(t_std(StdKind::MSet, SpecSet::explicit_set({m}), t_w()), input);
              Series via_partitions = sd::zsym_partition(m, p, 12);
              fail_unless(via_engine == via_partitions, "MSet row mismatch at m=" + std::to_string(m));
            }
            // fixpoint property and monotone iterate growth
            for (const char* eq : {"z + z*Seq(w)", "z + z*MSet(w)", "z + z*w^2"}) {
              TermPtr t = parse(eq);
              auto sol = solve(t, 48);
              fail_unless(apply_operator(t, sol.series) == sol.series, "fixpoint property");
              std::vector<Series> iterates;
              solve_by_iteration(t, 16, &iterates);
              for (size_t i = 1; i < iterates.size(); ++i)
                fail_unless(dominates(iterates[i - 1], iterates[i]), "monotone iterates");
            }
            // prefix (d, q) against the operator-side formula on elementary corpus
            for (const char* eq : {"z + z*w^2", "z + z*Seq(w)", "z + z*expm1(w)", "z^2 + z^2*w^2"}) {
              TermPtr t = parse(eq);
              auto sol = solve(t, 96);
              auto a = compute_dq(sol);
              auto b = elementary_dq(t, sol);
              fail_unless(a.d == b.d && a.q == b.q, std::string("(d,q) disagreement for ") + eq);
            }
            return std::string("all property suites passed");
          });

  // degraded mode: run a smoke analysis at the forced order so the warnings
  // (prefix-estimate periods, skipped fits) become visible
  if (cfg.forced_order) {
    AcceptanceRow row;
    row.name = "degraded smoke run at order " + std::to_string(*cfg.forced_order);
    sd::RowTimer timer;
    try {
      RunConfig rc;
      rc.order = std::max(32, *cfg.forced_order);
      std::string warnings;
      for (const char* eq : {"w = z + z*w^2", "w = z^2 + z^2*w^2"}) {
        auto rep = analyze_text(eq, rc);
        for (const auto& w : rep.warnings) warnings += "[" + w + "] ";
      }
      row.detail = warnings.empty() ? "no warnings surfaced" : warnings;
      row.pass = true;
    } catch (const std::exception& e) {
      row.detail = e.what();
      row.pass = false;
    }
    row.seconds = timer.elapsed();
    rows.push_back(row);
  }

  return rows;
}

inline int print_acceptance(const std::vector<AcceptanceRow>& rows, std::ostream& os) {
  int failures = 0;
  for (const auto& row : rows) {
    std::string status = row.skipped ? "SKIP" : (row.pass ? "PASS" : "FAIL");
    if (!row.skipped && !row.pass) ++failures;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%6.2fs", row.seconds);
    os << status << " [" << buf << "] " << row.name;
    if (!row.detail.empty()) os << " -- " << row.detail;
    os << "\n";
  }
  os << (failures == 0 ? "acceptance: all criteria passed\n"
                       : "acceptance: " + std::to_string(failures) + " criteria FAILED\n");
  return failures;
}

}  // namespace polya
