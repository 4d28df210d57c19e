#pragma once

// End-to-end orchestration: parse -> certify -> solve -> (d,q) ->
// characteristic point -> constant -> empirical validation, with the stable
// JSON report schema.

#include <json.hpp>

#include <chrono>
#include <optional>
#include <string>

#include "polya/classify.hpp"
#include "polya/parser.hpp"
#include "polya/report.hpp"

namespace polya {

struct RunConfig {
  int order = 600;
  double tol = 1e-8;
  double fit_threshold = 0.05;
  int m_max = 400;
  bool json = false;

  void validate() const {
    if (order < 32 || order > 2048)
      throw Error(ErrorKind::InvalidArgument, "order must be in [32, 2048]");
    if (tol < 1e-12 || tol > 1e-4)
      throw Error(ErrorKind::InvalidArgument, "tolerance must be in [1e-12, 1e-4]");
  }
};

struct AnalysisReport {
  std::string equation;
  Certificate certificate;
  std::optional<SolutionPrefix> solution;
  std::optional<PeriodInfo> period;
  std::optional<PeriodInfo> period_operator_side;  // elementary cross-check
  std::optional<CharSolution> char_solution;
  std::optional<AsymptoticLaw> law;
  std::optional<FitReport> fit;
  std::optional<double> ratio_estimate;  // of 1/rho
  std::vector<std::string> warnings;
  int order_used = 0;
  int exit_code = 3;  // 0 certified+fit-pass, 2 rejected, 3 numeric failure
};

inline AnalysisReport analyze_term(const TermPtr& term, RunConfig cfg) {
  cfg.validate();
  AnalysisReport rep;
  rep.equation = pretty_print(term);
  rep.certificate = certify(term);
  rep.order_used = cfg.order;

  bool retro = check_retro(term) == RetroStatus::Retro;
  if (!retro) {
    rep.warnings.push_back("operator is not retro; coefficients were not computed");
    rep.exit_code = rep.certificate.certified ? 3 : 2;
    return rep;
  }

  int order = cfg.order;
  rep.solution = solve(term, order);

  auto compute_periods = [&] {
    rep.period = compute_dq(*rep.solution);
    if (rep.period->exactness == PeriodInfo::Exactness::PrefixEstimate)
      rep.warnings.push_back("period constants (d, q) are a prefix estimate");
    if (is_elementary_term(term)) {
      rep.period_operator_side = elementary_dq(term, *rep.solution);
      if (rep.period_operator_side->d != rep.period->d ||
          rep.period_operator_side->q != rep.period->q)
        rep.warnings.push_back("operator-side (d, q) disagrees with the prefix (report uses the prefix)");
    }
  };

  try {
    compute_periods();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroSolution) throw;
    rep.warnings.push_back("solution is identically zero at this order");
    rep.exit_code = rep.certificate.certified ? 3 : 2;
    return rep;
  }

  try {
    rep.ratio_estimate = ratio_rho_estimate(*rep.solution, *rep.period);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientSupportPoints) throw;
    rep.warnings.push_back("too few support points for the growth-ratio estimate");
  }

  if (!rep.certificate.certified) {
    rep.warnings.push_back("no certificate; law not asserted");
    rep.exit_code = 2;
    return rep;
  }

  // characteristic point, with order-doubling retries on precision loss
  CharOptions copt;
  copt.tol = cfg.tol;
  copt.integral = rep.certificate.classification.integral;
  copt.has_plethysm = term_has_plethysm(term);
  JetSettings jset;
  jset.m_max = cfg.m_max;

  for (int attempt = 0;; ++attempt) {
    try {
      PreparedEquation prep(term, *rep.solution, jset);
      rep.char_solution = find_char_point(prep, *rep.solution, copt);
      break;
    } catch (const Error& e) {
      bool retryable = e.kind() == ErrorKind::PrecisionLoss || e.kind() == ErrorKind::OrderTooLow;
      if (retryable && attempt < 3 && order < 2048) {
        order = std::min(2 * order, 2048);
        rep.warnings.push_back(std::string("retrying at order ") + std::to_string(order) + ": " + e.what());
        rep.solution = solve(term, order);
        rep.order_used = order;
        compute_periods();
        continue;
      }
      rep.warnings.push_back(std::string("characteristic solver failed: ") + e.what() +
                             (e.kind() == ErrorKind::NoCriticalPoint
                                  ? " (contradicts certification)"
                                  : ""));
      rep.exit_code = 3;
      return rep;
    }
  }

  if (rep.certificate.classification.openness == Openness::OpenForSolutionPending)
    rep.warnings.push_back("openness for the solution confirmed: Theta(T)(rho) observed finite");

  rep.law = asymptotic_constant(*rep.char_solution, *rep.period, cfg.tol);

  try {
    rep.fit = empirical_fit(*rep.solution, *rep.law, cfg.fit_threshold);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientSupportPoints) throw;
    rep.warnings.push_back("too few support points for the empirical fit");
  }

  rep.exit_code = rep.fit && rep.fit->pass ? 0 : 3;
  if (!rep.fit)
    rep.warnings.push_back("fit unavailable: treated as a numeric failure for the exit code");
  else if (!rep.fit->pass)
    rep.warnings.push_back("empirical fit deviation exceeds the threshold");
  return rep;
}

inline AnalysisReport analyze_text(const std::string& equation, const RunConfig& cfg) {
  return analyze_term(parse(equation), cfg);
}

// ---- rendering -------------------------------------------------------------

inline const char* to_string(RetroStatus s) {
  return s == RetroStatus::Retro ? "retro" : "weakly_retro";
}

inline const char* to_string(Openness o) {
  switch (o) {
    case Openness::OpenElementary: return "open_elementary";
    case Openness::OpenForSolutionPending: return "open_for_solution_pending";
    case Openness::NotOpen: return "not_open";
  }
  return "?";
}

inline const char* to_string(MembershipKind m) {
  switch (m) {
    case MembershipKind::InOE: return "O_E";
    case MembershipKind::InOI: return "O_I";
    case MembershipKind::InONeither: return "neither";
  }
  return "?";
}

inline nlohmann::json to_json(const AnalysisReport& rep) {
  nlohmann::json j;
  j["equation"] = rep.equation;

  const Classification& cl = rep.certificate.classification;
  j["classification"] = {
      {"retro", to_string(cl.retro)},
      {"nonlinear", cl.nonlinear},
      {"bounded_R", cl.bounded ? nlohmann::json(rat_string(*cl.bounded)) : nlohmann::json()},
      {"integral", cl.integral},
      {"openness", to_string(cl.openness)},
      {"membership", to_string(cl.membership.kind)},
  };

  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.certificate.checks)
    checks.push_back({{"hypothesis", c.hypothesis}, {"pass", c.pass}, {"reason", c.reason}});
  j["certificate"] = {
      {"verdict", rep.certificate.certified ? "Certified" : "Rejected"},
      {"reason", rep.certificate.rejection_reason},
      {"checks", checks},
  };

  j["d"] = rep.period ? nlohmann::json(rep.period->d) : nlohmann::json();
  j["q"] = rep.period ? nlohmann::json(rep.period->q) : nlohmann::json();
  if (rep.char_solution) {
    j["rho"] = rep.char_solution->rho;
    j["rho_error"] = rep.char_solution->rho_error;
    j["tau"] = rep.char_solution->tau;
  } else {
    j["rho"] = nullptr;
    j["rho_error"] = nullptr;
    j["tau"] = nullptr;
  }
  if (rep.law) {
    j["C"] = rep.law->C;
    const CharSolution& cs = *rep.char_solution;
    double rel = 0.5 * cs.rho_error / cs.rho +
                 0.5 * cs.tail_error / std::max(cs.Ez, 1e-12) +
                 0.5 * cs.tail_error / std::max(cs.Eww, 1e-12);
    j["C_error"] = rep.law->C * rel;
  } else {
    j["C"] = nullptr;
    j["C_error"] = nullptr;
  }
  j["fit"] = rep.fit ? nlohmann::json{{"deviation", rep.fit->relative_deviation},
                                      {"pass", rep.fit->pass}}
                     : nlohmann::json();

  nlohmann::json head = nlohmann::json::array();
  if (rep.solution) {
    const Series& s = rep.solution->series;
    for (int n = 1; n <= std::min(20, s.order()); ++n) head.push_back(rat_string(s.at(n)));
  }
  j["coefficients_head"] = head;
  j["warnings"] = rep.warnings;
  if (rep.ratio_estimate) j["growth_ratio_estimate"] = *rep.ratio_estimate;
  j["exit_code"] = rep.exit_code;
  j["order"] = rep.order_used;
  return j;
}

inline std::string to_text(const AnalysisReport& rep) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };
  line("equation: " + rep.equation);
  line(std::string("verdict: ") + (rep.certificate.certified ? "Certified" : "Rejected") +
       (rep.certificate.certified ? "" : " (" + rep.certificate.rejection_reason + ")"));
  for (const auto& c : rep.certificate.checks)
    line("  [" + std::string(c.pass ? "ok" : "FAIL") + "] " + c.hypothesis +
         (c.reason.empty() ? "" : ": " + c.reason));
  const Classification& cl = rep.certificate.classification;
  line(std::string("classification: ") + to_string(cl.retro) + ", " +
       (cl.nonlinear ? "nonlinear" : "linear") + ", " + (cl.integral ? "integral" : "real") +
       ", membership " + to_string(cl.membership.kind) +
       (cl.bounded ? ", bounded R=" + rat_string(*cl.bounded) : ", unbounded"));
  if (rep.period)
    line("period: d = " + std::to_string(rep.period->d) + ", q = " + std::to_string(rep.period->q) +
         (rep.period->exactness == PeriodInfo::Exactness::ProvedStable ? " (stable)"
                                                                       : " (prefix estimate)"));
  if (rep.char_solution) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "rho = %.12g (+/- %.2g), tau = %.12g",
                  rep.char_solution->rho, rep.char_solution->rho_error, rep.char_solution->tau);
    line(buf);
    std::snprintf(buf, sizeof buf, "E_z = %.12g, E_ww = %.12g, residuals (%.2g, %.2g)",
                  rep.char_solution->Ez, rep.char_solution->Eww, rep.char_solution->resid_value,
                  rep.char_solution->resid_deriv);
    line(buf);
  }
  if (rep.law) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "law: t(n) ~ %.10g * %.10g^-n * n^-3/2 for %s",
                  rep.law->C, rep.law->rho, rep.law->support.c_str());
    line(buf);
  }
  if (rep.fit) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "fit: tail deviation %.4f (%s)", rep.fit->relative_deviation,
                  rep.fit->pass ? "pass" : "fail");
    line(buf);
  }
  if (rep.ratio_estimate) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "growth ratio estimate: 1/rho ~ %.6f", *rep.ratio_estimate);
    line(buf);
  }
  if (rep.solution) {
    std::string head = "coefficients: ";
    const Series& s = rep.solution->series;
    for (int n = 1; n <= std::min(12, s.order()); ++n)
      head += (n > 1 ? ", " : "") + rat_string(s.at(n));
    line(head + ", ...");
  }
  for (const auto& w : rep.warnings) line("warning: " + w);
  return out;
}

}  // namespace polya
