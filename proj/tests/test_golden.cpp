// Golden corpus: every shipped equation file runs through the full pipeline
// and is compared against its expected-report snapshot (numeric fields with
// tolerances, exact fields exactly).

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "polya/pipeline.hpp"

#ifndef POLYA_SOURCE_DIR
#define POLYA_SOURCE_DIR "."
#endif

using namespace polya;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("golden corpus matches the expected snapshots") {
  const std::string base = std::string(POLYA_SOURCE_DIR) + "/equations/";
  nlohmann::json expected = nlohmann::json::parse(slurp(base + "expected.json"));
  REQUIRE(expected.size() >= 12);

  for (auto& [name, want] : expected.items()) {
    DYNAMIC_SECTION(name) {
      std::string eq = slurp(base + name + ".eq");
      RunConfig cfg;
      cfg.order = want["order"].get<int>();
      AnalysisReport rep = analyze_text(eq, cfg);

      CHECK(rep.exit_code == want["exit"].get<int>());
      CHECK((rep.certificate.certified ? "Certified" : "Rejected") ==
            want["verdict"].get<std::string>());
      if (want.contains("reason"))
        CHECK(rep.certificate.rejection_reason.rfind(want["reason"].get<std::string>(), 0) == 0);

      if (want.contains("d")) {
        REQUIRE(rep.period.has_value());
        CHECK(rep.period->d == want["d"].get<long>());
        CHECK(rep.period->q == want["q"].get<long>());
      }
      if (want.contains("rho")) {
        REQUIRE(rep.char_solution.has_value());
        CHECK(rep.char_solution->rho == Catch::Approx(want["rho"].get<double>()).epsilon(1e-9));
        CHECK(rep.char_solution->tau == Catch::Approx(want["tau"].get<double>()).epsilon(1e-7));
      }
      if (want.contains("C")) {
        REQUIRE(rep.law.has_value());
        CHECK(rep.law->C == Catch::Approx(want["C"].get<double>()).epsilon(1e-7));
      }
      if (want.contains("fit_deviation")) {
        REQUIRE(rep.fit.has_value());
        CHECK(rep.fit->relative_deviation ==
              Catch::Approx(want["fit_deviation"].get<double>()).margin(1e-4));
      }
      if (want.contains("head")) {
        REQUIRE(rep.solution.has_value());
        auto head = want["head"];
        for (size_t i = 0; i < head.size(); ++i)
          CHECK(rat_string(rep.solution->series.at(static_cast<int>(i) + 1)) ==
                head[i].get<std::string>());
      }
    }
  }
}

TEST_CASE("JSON schema is stable across the corpus") {
  const std::string base = std::string(POLYA_SOURCE_DIR) + "/equations/";
  nlohmann::json expected = nlohmann::json::parse(slurp(base + "expected.json"));
  const std::vector<std::string> keys = {"equation", "classification", "certificate", "d",
                                         "q",        "rho",            "rho_error",   "tau",
                                         "C",        "C_error",        "fit",
                                         "coefficients_head", "warnings"};
  for (auto& [name, want] : expected.items()) {
    RunConfig cfg;
    cfg.order = std::min(want["order"].get<int>(), 128);
    AnalysisReport rep = analyze_text(slurp(base + name + ".eq"), cfg);
    nlohmann::json j = to_json(rep);
    for (const auto& k : keys) {
      INFO(name << " key " << k);
      CHECK(j.contains(k));
    }
  }
}
