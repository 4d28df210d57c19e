// Command-line front end: parse -> classify -> solve -> (d,q) -> singularity
// -> report.
//
// Exit codes: 0 certified with a passing fit; 1 parse error; 2 rejected
// equation; 3 numeric failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polya/pipeline.hpp"
#include "polya/selftest.hpp"

namespace {

std::string read_input(const std::string& inline_text, const std::string& file) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << "error: cannot open " << file << "\n";
      std::exit(1);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  if (inline_text.empty()) {
    std::cerr << "error: no equation given (inline string or -f file)\n";
    std::exit(1);
  }
  return inline_text;
}

int default_order() {
  if (const char* env = std::getenv("POLYA_ORDER")) {
    try {
      return std::stoi(env);
    } catch (...) {
      std::cerr << "warning: ignoring invalid POLYA_ORDER='" << env << "'\n";
    }
  }
  return 600;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polya: certification and square-root-singularity asymptotics of recursion "
               "equations w = Theta(w)"};
  app.require_subcommand(1);

  std::string equation, file;
  polya::RunConfig cfg;
  cfg.order = default_order();

  auto add_common = [&](CLI::App* cmd, bool with_tuning) {
    cmd->add_option("equation", equation, "equation, e.g. \"w = z + z*w^2\"");
    cmd->add_option("-f,--file", file, "read the equation from a file");
    cmd->add_option("--order", cfg.order, "truncation order N in [32, 2048]");
    if (with_tuning) {
      cmd->add_option("--tol", cfg.tol, "solver tolerance in [1e-12, 1e-4]");
      cmd->add_option("--fit-threshold", cfg.fit_threshold, "empirical-fit pass threshold");
      cmd->add_option("--m-max", cfg.m_max, "truncation of infinite member sums");
      cmd->add_flag("--json", cfg.json, "emit the JSON report");
    }
  };

  CLI::App* analyze = app.add_subcommand("analyze", "full certification and asymptotics report");
  add_common(analyze, true);

  CLI::App* coeffs = app.add_subcommand("coeffs", "exact solution coefficients t(1..N)");
  add_common(coeffs, false);

  CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  int st_order = 0;
  double st_tol = 1e-8;
  selftest->add_option("--order", st_order, "force a (degraded) truncation order");
  selftest->add_option("--tol", st_tol, "solver tolerance for the closed-form rows");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      auto rep = polya::analyze_text(read_input(equation, file), cfg);
      if (cfg.json)
        std::cout << polya::to_json(rep).dump(2) << "\n";
      else
        std::cout << polya::to_text(rep);
      return rep.exit_code;
    }
    if (*coeffs) {
      polya::TermPtr t = polya::parse(read_input(equation, file));
      if (polya::check_retro(t) != polya::RetroStatus::Retro) {
        std::cerr << "error: the operator is not retro; no recursive solution\n";
        return 2;
      }
      auto sol = polya::solve(t, cfg.order);
      std::string list;
      for (int n = 1; n <= sol.series.order(); ++n) {
        std::string c = polya::rat_string(sol.series.at(n));
        std::cout << c << "\n";
        list += (n > 1 ? "," : "") + c;
      }
      std::cout << "\n" << list << "\n";
      return 0;
    }
    if (*selftest) {
      polya::SelftestConfig scfg;
      if (st_order > 0) scfg.forced_order = st_order;
      scfg.tol = st_tol;
      auto rows = polya::run_acceptance(scfg);
      int failures = polya::print_acceptance(rows, std::cout);
      return failures == 0 ? 0 : 3;
    }
  } catch (const polya::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const polya::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
