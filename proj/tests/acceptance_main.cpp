// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sponsurv/sponsurv.hpp>

#include "cox_fixtures.hpp"
#include "reference_panel.hpp"

namespace fs = std::filesystem;
using namespace sponsurv;

namespace {

int failures = 0;
std::vector<std::string> notes;

void report(int criterion, const std::string& label, bool pass,
            const std::string& detail = "") {
  std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
              label.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

// --- criterion 1: golden life-table reproduction --------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spells = spells_from_panel(reference_panel::dataset());
  int ended = 0, censored = 0;
  for (const auto& s : spells) (s.ended ? ended : censored) += 1;

  bool counts_ok = spells.size() == 5836 && ended == 4949 && censored == 887;

  const auto table = life_table(spells);
  bool values_ok = table.rows.size() == 50;
  double worst_hazard = 0.0, worst_survivor = 0.0;
  for (std::size_t j = 0; j < table.rows.size() && values_ok; ++j) {
    // published table carries one-unit rounding noise in the 4th decimal of
    // three hazard cells; survivors reproduce exactly after rounding
    const double dh = std::abs(round4(table.rows[j].hazard) -
                               reference_panel::kExpectedHazard[j]);
    const double ds = std::abs(round4(table.rows[j].survivor) -
                               reference_panel::kExpectedSurvivor[j]);
    worst_hazard = std::max(worst_hazard, dh);
    worst_survivor = std::max(worst_survivor, ds);
  }
  values_ok = values_ok && worst_hazard <= 1e-4 + 1e-9 && worst_survivor <= 1e-9;

  const auto [hazard, renewal] = overall_hazard(table);
  const bool overall_ok = std::abs(hazard - 0.2109) <= 1e-4;
  const bool renewal_ok = fmt::fixed(renewal * 100.0, 1) == "78.9";
  const auto median = median_lifetime(survivor_curve(table));
  const bool median_ok = median && std::abs(*median - 2.08) <= 0.005;
  const double elapsed = seconds_since(t0);

  // the CLI surface reproduces the same summary line
  const fs::path dir =
      fs::temp_directory_path() / ("sponsurv_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream panel(dir / "panel.csv", std::ios::binary);
    panel << reference_panel::panel_csv();
  }
  const std::string command = std::string(SPONSURV_CLI_PATH) + " lifetable " +
                              (dir / "panel.csv").string() + " > " +
                              (dir / "out.txt").string() + " 2> /dev/null";
  const int status = std::system(command.c_str());
  std::string cli_out;
  {
    std::ifstream in(dir / "out.txt", std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    cli_out = s.str();
  }
  fs::remove_all(dir);
  const std::string golden =
      "overall hazard rate: 0.2109 / renewal rate: 78.9% / median lifetime: "
      "2.08 years\n";
  const bool cli_ok = WEXITSTATUS(status) == 0 && cli_out.size() > golden.size() &&
                      cli_out.substr(cli_out.size() - golden.size()) == golden;

  std::ostringstream detail;
  detail << "hazard dev " << worst_hazard << ", survivor dev " << worst_survivor
         << ", overall " << fmt::probability(hazard) << ", median "
         << (median ? fmt::fixed(*median, 4) : std::string("none")) << ", "
         << fmt::fixed(elapsed, 2) << "s";
  report(1, "golden life-table reproduction",
         counts_ok && values_ok && overall_ok && renewal_ok && median_ok &&
             cli_ok && elapsed < 1.0,
         detail.str());
}

// --- criterion 2: AIC/BIC identity ----------------------------------------

void criterion_2() {
  const auto [aic, bic] = information_criteria(-38282.7, 45, 23460);
  const bool ok = std::abs(aic - 76655.3) <= 0.1 && std::abs(bic - 77017.9) <= 0.5;
  report(2, "information-criteria identity", ok,
         "AIC " + fmt::fixed(aic, 2) + ", BIC " + fmt::fixed(bic, 2));
}

// --- criterion 3: oracle equivalence --------------------------------------

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  for (int seed = 1; seed <= 20 && ok; ++seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    const auto m = cox_fixtures::random_heavy_ties(rng, 50, 1);
    FitOptions options;
    options.ties = TiesMethod::breslow;
    const CoxModel model = fit_cox(m, options);
    const auto grid = grid_search_mle(m, {-5.0, 5.0}, 1e-3, TiesMethod::breslow);
    const double diff = std::abs(model.beta(0) - grid.beta(0));
    worst = std::max(worst, diff);
    if (diff > 1e-3) ok = false;
  }
  FitOptions breslow;
  breslow.ties = TiesMethod::breslow;
  const CoxModel tied = fit_cox(cox_fixtures::tied_instance(), breslow);
  if (std::abs(tied.beta(0)) > 1e-6) ok = false;
  const double elapsed = seconds_since(t0);
  report(3, "newton matches the grid-search oracle", ok && elapsed < 10.0,
         "worst |diff| " + fmt::fixed(worst, 6) + ", tied beta " +
             fmt::fixed(tied.beta(0), 8) + ", " + fmt::fixed(elapsed, 2) + "s");
}

// --- criterion 4: derivative correctness ----------------------------------

void criterion_4() {
  std::mt19937 rng(9001);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const std::vector<DesignMatrix> shapes = {
      cox_fixtures::random_tie_free(rng, 30),
      cox_fixtures::random_heavy_ties(rng, 40),
      cox_fixtures::random_time_varying(rng, 15),
  };
  bool ok = true;
  double worst_grad = 0.0, worst_hess = 0.0;
  for (const auto& m : shapes) {
    for (int point = 0; point < 10; ++point) {
      Eigen::VectorXd beta(m.cols());
      for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = unif(rng);
      for (auto ties : {TiesMethod::breslow, TiesMethod::efron}) {
        const auto check = finite_diff_check(m, beta, 1e-5, ties);
        worst_grad = std::max(worst_grad, check.gradient_rel_error);
        worst_hess = std::max(worst_hess, check.hessian_rel_error);
        if (check.gradient_rel_error >= 1e-6 || check.hessian_rel_error >= 1e-4) {
          ok = false;
        }
      }
    }
  }
  report(4, "analytic derivatives match finite differences", ok,
         "worst gradient " + fmt::fixed(worst_grad * 1e9, 3) + "e-9, worst hessian " +
             fmt::fixed(worst_hess * 1e6, 3) + "e-6");
}

// --- criterion 5: parameter recovery --------------------------------------

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorSpec gen;
  gen.n = 5000;
  gen.baseline_hazard = {0.15};
  gen.max_horizon = 30;
  gen.seed = 90210;
  gen.covariates = {
      {"brand_equity", CovariateSpec::Kind::bernoulli, 0.4, 0, 1, 0.5, false},
      {"gdp_growth", CovariateSpec::Kind::uniform, 0, 0.0, 2.0, -0.3, true},
  };
  const Dataset panel = generate_panel(gen);
  BlockSpec spec;
  spec.blocks = {{"covariates", {"brand_equity", "gdp_growth"}}};
  const DesignMatrix m = design_matrix(panel, spec);
  CoxModel model = fit_cox(m);
  const bool recovery_ok = std::abs(model.beta(0) - 0.5) < 0.1 &&
                           std::abs(model.beta(1) - (-0.3)) < 0.1;

  // singleton clusters: every row its own cluster
  std::vector<std::string> singleton;
  singleton.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    singleton.push_back("r" + std::to_string(i));
  }
  const DesignMatrix singleton_matrix = DesignMatrix::from_raw(
      m.column_names(), m.column_blocks(), m.values(), m.start_times(),
      m.stop_times(), m.events(), singleton);
  const Eigen::MatrixXd robust = clustered_covariance(model, singleton_matrix);
  bool se_ok = true;
  double worst_ratio = 1.0;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    const double ratio = std::sqrt(robust(j, j) / model.covariance_model(j, j));
    worst_ratio = std::max(worst_ratio, std::max(ratio, 1.0 / ratio));
    if (ratio < 0.9 || ratio > 1.1) se_ok = false;
  }
  const double elapsed = seconds_since(t0);
  report(5, "parameter recovery at n=5000", recovery_ok && se_ok && elapsed < 30.0,
         "beta (" + fmt::fixed(model.beta(0), 3) + ", " +
             fmt::fixed(model.beta(1), 3) + "), worst SE ratio " +
             fmt::fixed(worst_ratio, 3) + ", " + fmt::fixed(elapsed, 2) + "s");
}

// --- criterion 6: invariance suite ----------------------------------------

void criterion_6() {
  std::mt19937 rng(606);
  const auto base = cox_fixtures::random_heavy_ties(rng, 60);
  bool ok = true;
  std::string why;

  // translation
  {
    std::vector<std::vector<double>> columns(2);
    for (std::size_t r = 0; r < base.rows(); ++r) {
      columns[0].push_back(base.values()(static_cast<Eigen::Index>(r), 0) + 5.0);
      columns[1].push_back(base.values()(static_cast<Eigen::Index>(r), 1));
    }
    const auto shifted = cox_fixtures::make_matrix(
        columns, base.start_times(), base.stop_times(), base.events());
    CoxModel a = fit_cox(base);
    CoxModel b = fit_cox(shifted);
    const Eigen::MatrixXd va = clustered_covariance(a, base);
    const Eigen::MatrixXd vb = clustered_covariance(b, shifted);
    if (std::abs(a.log_likelihood - b.log_likelihood) > 1e-8 ||
        (a.beta - b.beta).cwiseAbs().maxCoeff() > 1e-8 ||
        (va.diagonal().cwiseSqrt() - vb.diagonal().cwiseSqrt())
                .cwiseAbs()
                .maxCoeff() > 1e-8) {
      ok = false;
      why = "translation";
    }
  }
  // scaling
  if (ok) {
    const double a_scale = 2.5;
    std::vector<std::vector<double>> columns(2);
    for (std::size_t r = 0; r < base.rows(); ++r) {
      columns[0].push_back(base.values()(static_cast<Eigen::Index>(r), 0) *
                           a_scale);
      columns[1].push_back(base.values()(static_cast<Eigen::Index>(r), 1));
    }
    const auto scaled = cox_fixtures::make_matrix(
        columns, base.start_times(), base.stop_times(), base.events());
    CoxModel a = fit_cox(base);
    CoxModel b = fit_cox(scaled);
    a.covariance_clustered = clustered_covariance(a, base);
    b.covariance_clustered = clustered_covariance(b, scaled);
    const auto rows_a = hazard_ratio_table(a);
    const auto rows_b = hazard_ratio_table(b);
    if (std::abs(a.log_likelihood - b.log_likelihood) > 1e-8 ||
        std::abs(a.beta(0) / a_scale - b.beta(0)) > 1e-8 ||
        std::abs(rows_a[0].z - rows_b[0].z) > 1e-6 ||
        std::abs(rows_a[1].z - rows_b[1].z) > 1e-6) {
      ok = false;
      why = "scaling";
    }
  }
  // tie-free Breslow == Efron
  if (ok) {
    std::mt19937 rng2(607);
    const auto tie_free = cox_fixtures::random_tie_free(rng2, 40);
    FitOptions fb, fe;
    fb.ties = TiesMethod::breslow;
    fe.ties = TiesMethod::efron;
    const CoxModel a = fit_cox(tie_free, fb);
    const CoxModel b = fit_cox(tie_free, fe);
    Eigen::VectorXd probe(1);
    probe << 0.37;
    const double va = partial_log_likelihood_value(tie_free, probe,
                                                   TiesMethod::breslow);
    const double vb =
        partial_log_likelihood_value(tie_free, probe, TiesMethod::efron);
    if (std::abs(va - vb) > 1e-12 ||
        std::abs(a.log_likelihood - b.log_likelihood) > 1e-12) {
      ok = false;
      why = "ties";
    }
  }
  // nested-model monotonicity over the five-block protocol
  if (ok) {
    GeneratorSpec gen;
    gen.n = 250;
    gen.baseline_hazard = {0.3, 0.25, 0.2};
    gen.max_horizon = 10;
    gen.censoring_rate = 0.1;
    gen.seed = 424242;
    gen.covariates = {
        {"regional_proximity", CovariateSpec::Kind::bernoulli, 0.4, 0, 1, -0.2,
         false},
        {"brand_equity", CovariateSpec::Kind::bernoulli, 0.3, 0, 1, -0.3, false},
        {"publicly_traded", CovariateSpec::Kind::bernoulli, 0.6, 0, 1, -0.1,
         false},
        {"congruence", CovariateSpec::Kind::bernoulli, 0.5, 0, 1, 0.0, false},
        {"b2b", CovariateSpec::Kind::bernoulli, 0.25, 0, 1, 0.0, false},
        {"gdp_growth", CovariateSpec::Kind::uniform, 0, -2.0, 5.0, 0.02, true},
        {"cpi_inflation", CovariateSpec::Kind::uniform, 0, 0.0, 8.0, 0.0, true},
        {"clutter", CovariateSpec::Kind::uniform, 0, 1.0, 30.0, 0.0, false},
    };
    const Dataset panel = generate_panel(gen);
    BlockSpec spec;
    spec.blocks = {
        {"one", {"regional_proximity", "brand_equity"}},
        {"two", {"publicly_traded", "congruence"}},
        {"three", {"b2b"}},
        {"four", {"gdp_growth", "cpi_inflation"}},
        {"five", {"clutter"}},
    };
    const auto result = hierarchical_fit(panel, spec);
    for (std::size_t k = 1; k < result.models.size(); ++k) {
      if (result.models[k].log_likelihood <
          result.models[k - 1].log_likelihood - 1e-6) {
        ok = false;
        why = "nested monotonicity";
      }
    }
  }
  report(6, "invariance suite", ok, why.empty() ? "" : "failed: " + why);
}

// --- criterion 7: hazard-ratio rendering ----------------------------------

void criterion_7() {
  const bool phrases_ok = percent_change_phrase(0.809) == "19.1% less likely" &&
                          percent_change_phrase(0.794) == "20.6% less likely";

  // the phrases appear verbatim in a rendered text report
  CoxModel model;
  model.column_names = {"brand_equity", "publicly_traded"};
  model.column_blocks = {"sponsor_characteristics", "sponsor_characteristics"};
  model.beta = Eigen::VectorXd(2);
  model.beta << std::log(0.809), std::log(0.794);
  model.covariance_model = Eigen::MatrixXd::Identity(2, 2) * 0.0016;
  model.covariance_clustered = model.covariance_model;
  model.log_likelihood = -100.0;
  model.converged = true;
  HierarchicalResult result;
  result.models.push_back(model);
  FitReport report_entry;
  report_entry.rows = hazard_ratio_table(model);
  report_entry.entered_block = {"sponsor_characteristics", 25.0, 2, 1e-5};
  report_entry.aic = 204.0;
  report_entry.bic = 205.0;
  report_entry.log_likelihood = -100.0;
  report_entry.k_parameters = 2;
  result.reports.push_back(report_entry);
  const std::string text = fit_report_text(result);
  const bool report_ok = text.find("19.1% less likely") != std::string::npos &&
                         text.find("20.6% less likely") != std::string::npos;
  report(7, "hazard-ratio phrasing", phrases_ok && report_ok);
}

// --- criterion 8: forecast arithmetic -------------------------------------

void criterion_8() {
  bool ok = true;
  std::string why;

  std::vector<double> half{1.0};
  for (int t = 1; t <= 50; ++t) half.push_back(half.back() * 0.5);
  SurvivorCurve half_curve;
  half_curve.values = half;
  const auto duration = expected_duration(half_curve, 0, 50);
  if (std::abs(duration.years - 2.0) > 1e-9) {
    ok = false;
    why = "constant-hazard duration";
  }

  if (ok && std::abs(revenue_forecast(4.87, 2.25e6) - 10.9575e6) > 1e-6) {
    ok = false;
    why = "revenue product";
  }
  if (ok && std::abs(18.77 / 2.25 - 8.342) > 1e-3) {
    ok = false;
    why = "implied duration";
  }

  if (ok) {
    const auto table = life_table(spells_from_panel(reference_panel::dataset()));
    CoxModel model;
    model.column_names = {"brand_equity"};
    model.column_blocks = {"sponsor_characteristics"};
    model.beta = Eigen::VectorXd::Zero(1);
    for (const auto& row : table.rows) {
      model.baseline.times.push_back(row.period);
      model.baseline.increments.push_back(row.hazard);
    }
    CovariateProfile young, old;
    young.id = "young";
    young.current_tenure = 1;
    old.id = "old";
    old.current_tenure = 12;
    const auto entries = portfolio_audit(model, {young, old});
    const double young_exit =
        entries[0].id == "young" ? entries[0].exit_within_2yr
                                 : entries[1].exit_within_2yr;
    const double old_exit = entries[0].id == "old" ? entries[0].exit_within_2yr
                                                   : entries[1].exit_within_2yr;
    if (std::abs(young_exit - 0.438) > 0.002 ||
        std::abs(old_exit - 0.138) > 0.002) {
      ok = false;
      why = "triage probabilities (" + fmt::probability(young_exit) + ", " +
            fmt::probability(old_exit) + ")";
    }
  }
  report(8, "forecast arithmetic", ok, why);
}

// --- criterion 9: statistical sanity of z under the null -------------------

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  int rejections = 0;
  for (int seed = 1; seed <= 200; ++seed) {
    GeneratorSpec gen;
    gen.n = 300;
    gen.baseline_hazard = {0.3};
    gen.max_horizon = 10;
    gen.censoring_rate = 0.1;
    gen.seed = 50000 + static_cast<std::uint64_t>(seed);
    gen.covariates = {
        {"brand_equity", CovariateSpec::Kind::bernoulli, 0.5, 0, 1, 0.0, false}};
    const Dataset panel = generate_panel(gen);
    BlockSpec spec;
    spec.blocks = {{"b", {"brand_equity"}}};
    const DesignMatrix m = design_matrix(panel, spec);
    CoxModel model = fit_cox(m);
    model.covariance_clustered = clustered_covariance(model, m);
    const double z =
        model.beta(0) / std::sqrt(model.covariance_clustered(0, 0));
    if (std::abs(z) > 1.96) ++rejections;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = rejections >= 2 && rejections <= 16;
  report(9, "null z calibration over 200 replications", ok,
         std::to_string(rejections) + " rejections (nominal 10), " +
             fmt::fixed(elapsed, 2) + "s");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criterion(s) failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
