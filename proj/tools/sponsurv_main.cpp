// Command-line surface for the sponsorship survival engine.
//
// Subcommands: lifetable, fit, predict, audit, simulate, plot. Results go to
// stdout or to files requested by flags; diagnostics go to stderr. Exit codes:
// 0 success, 1 validation error, 2 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sponsurv/sponsurv.hpp>

namespace {

using sponsurv::Error;

std::ifstream open_input(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error::validation("IoError", "input file '" + path + "' does not exist");
  }
  std::ifstream in(path);
  if (!in) {
    throw Error::validation("IoError", "cannot read input file '" + path + "'");
  }
  return in;
}

// All computation happens before this is called, so a failed command never
// leaves a partial output file behind.
void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error::validation("IoError", "cannot open output file '" + path + "'");
  }
  out << content;
  if (!out) {
    throw Error::validation("IoError", "failed writing output file '" + path + "'");
  }
}

struct CommandPaths {
  std::string panel;
  std::string blocks = "default";
  std::string out;
  std::string json_out;
  std::string model;
  std::string profile;
  std::string portfolio;
  std::string spec;
  std::string plot_out;
  std::string lifetable;
  std::string format = "text";
  std::string predict_format = "json";
  std::string ties = "efron";
  double tol = 1e-8;
  int max_iter = 100;
  int horizon = 50;
  int bandwidth = 3;
  double fee = -1.0;
};

sponsurv::TiesMethod parse_ties(const std::string& token) {
  if (token == "efron") return sponsurv::TiesMethod::efron;
  if (token == "breslow") return sponsurv::TiesMethod::breslow;
  throw Error::validation("BadFlag", "--ties must be 'efron' or 'breslow'");
}

int run_lifetable(const CommandPaths& args) {
  auto in = open_input(args.panel);
  const sponsurv::Dataset dataset = sponsurv::parse_panel_csv(in);
  const auto spells = sponsurv::spells_from_panel(dataset);
  const sponsurv::LifeTable table = sponsurv::life_table(spells);

  std::string csv_out;
  if (!args.out.empty()) {
    std::ostringstream s;
    sponsurv::write_life_table_csv(table, s);
    csv_out = s.str();
  }
  std::string stdout_text;
  if (args.format == "csv") {
    std::ostringstream s;
    sponsurv::write_life_table_csv(table, s);
    stdout_text = s.str();
  } else if (args.format == "json") {
    stdout_text = sponsurv::life_table_to_json(table).dump(2) + "\n";
  } else {
    stdout_text = sponsurv::life_table_text(table);
  }
  if (!args.out.empty()) write_file(args.out, csv_out);
  if (!args.json_out.empty()) {
    write_file(args.json_out, sponsurv::life_table_to_json(table).dump(2) + "\n");
  }
  std::cout << stdout_text;
  return 0;
}

int run_fit(const CommandPaths& args) {
  auto in = open_input(args.panel);
  const sponsurv::Dataset dataset = sponsurv::parse_panel_csv(in);

  sponsurv::BlockSpec spec;
  if (args.blocks == "default") {
    spec = sponsurv::BlockSpec::default_spec();
  } else {
    auto spec_in = open_input(args.blocks);
    spec = sponsurv::read_block_spec_json(spec_in);
  }

  sponsurv::FitOptions options;
  options.ties = parse_ties(args.ties);
  options.tol = args.tol;
  options.max_iter = args.max_iter;

  sponsurv::HierarchicalResult result =
      sponsurv::hierarchical_fit(dataset, spec, options);

  // final model carries the baseline hazard for forecasting
  const sponsurv::DesignMatrix full = sponsurv::design_matrix(dataset, spec);
  result.models.back().baseline =
      sponsurv::baseline_cumulative_hazard(result.models.back(), full);

  const std::string report_text = sponsurv::fit_report_text(result);
  if (!args.out.empty()) {
    std::ostringstream s;
    sponsurv::write_model_json(result.models.back(), s);
    write_file(args.out, s.str());
  }
  if (!args.json_out.empty()) {
    write_file(args.json_out, sponsurv::fit_report_to_json(result).dump(2) + "\n");
  }
  std::cout << report_text;
  return 0;
}

int run_predict(const CommandPaths& args) {
  auto model_in = open_input(args.model);
  const sponsurv::CoxModel model = sponsurv::read_model_json(model_in);
  auto profile_in = open_input(args.profile);
  sponsurv::CovariateProfile profile = sponsurv::read_profile_json(profile_in);
  if (args.fee >= 0.0) profile.annual_fee = args.fee;

  const sponsurv::ForecastReport report =
      sponsurv::forecast_profile(model, profile, args.horizon);
  if (report.truncation_warning) {
    std::cerr << "warning[HorizonTooShort]: survivor exceeds .05 at the horizon; "
                 "expected duration is truncated low\n";
  }
  if (!args.plot_out.empty()) {
    write_file(args.plot_out,
               sponsurv::svg_survival_curve(
                   report.curve, profile.id.empty() ? "Survival profile"
                                                    : profile.id));
  }
  if (args.predict_format == "text") {
    std::cout << sponsurv::forecast_report_text(report, profile);
  } else {
    std::cout << sponsurv::forecast_report_to_json(report, profile).dump(2) << "\n";
  }
  return 0;
}

int run_audit(const CommandPaths& args) {
  auto model_in = open_input(args.model);
  const sponsurv::CoxModel model = sponsurv::read_model_json(model_in);
  auto portfolio_in = open_input(args.portfolio);
  const auto portfolio = sponsurv::read_portfolio_csv(portfolio_in);

  const auto entries = sponsurv::portfolio_audit(model, portfolio, args.horizon);
  if (!args.json_out.empty()) {
    write_file(args.json_out, sponsurv::audit_to_json(entries).dump(2) + "\n");
  }
  if (args.format == "json") {
    std::cout << sponsurv::audit_to_json(entries).dump(2) << "\n";
  } else {
    std::cout << sponsurv::audit_text(entries);
  }
  return 0;
}

int run_simulate(const CommandPaths& args) {
  auto spec_in = open_input(args.spec);
  const sponsurv::GeneratorSpec spec = sponsurv::read_generator_spec_json(spec_in);
  const sponsurv::Dataset dataset = sponsurv::generate_panel(spec);
  std::ostringstream s;
  sponsurv::write_panel_csv(dataset, s);
  write_file(args.out, s.str());
  std::cerr << "generated " << dataset.spell_count() << " spells, "
            << dataset.observation_count() << " observations\n";
  return 0;
}

int run_plot(const CommandPaths& args) {
  auto in = open_input(args.lifetable);
  const sponsurv::LifeTable table = sponsurv::read_life_table_csv(in);
  write_file(args.out, sponsurv::svg_life_table_curves(table, args.bandwidth));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survival analysis and renewal forecasting for sponsorship panels"};
  app.set_version_flag("--version", std::string("sponsurv ") + sponsurv::kVersion);
  app.require_subcommand(1);

  CommandPaths args;

  auto* lifetable = app.add_subcommand(
      "lifetable", "life table, hazard/survivor functions, median lifetime");
  lifetable->add_option("panel", args.panel, "panel CSV file")->required();
  lifetable->add_option("--out", args.out, "write life table CSV here");
  lifetable->add_option("--json", args.json_out, "write life table JSON here");
  lifetable->add_option("--format", args.format, "stdout format: text|csv|json");

  auto* fit = app.add_subcommand(
      "fit", "hierarchical Cox proportional hazards fit with robust SEs");
  fit->add_option("panel", args.panel, "panel CSV file")->required();
  fit->add_option("--blocks", args.blocks,
                  "block spec JSON path, or 'default' for the five-block entry");
  fit->add_option("--ties", args.ties, "tie handling: efron|breslow");
  fit->add_option("--out", args.out, "persist the final model as JSON");
  fit->add_option("--json", args.json_out, "write the fit report as JSON");
  fit->add_option("--tol", args.tol, "relative log-likelihood tolerance");
  fit->add_option("--max-iter", args.max_iter, "Newton iteration cap");

  auto* predict = app.add_subcommand(
      "predict", "survival curve, expected duration and revenue for a profile");
  predict->add_option("--model", args.model, "fitted model JSON")->required();
  predict->add_option("--profile", args.profile, "covariate profile JSON")
      ->required();
  predict->add_option("--fee", args.fee, "annual fee (overrides the profile)");
  predict->add_option("--horizon", args.horizon, "forecast horizon in periods");
  predict->add_option("--plot", args.plot_out, "write the survival curve SVG here");
  predict->add_option("--format", args.predict_format,
                      "stdout format: json|text");

  auto* audit = app.add_subcommand(
      "audit", "portfolio triage ranked by near-term exit probability");
  audit->add_option("--model", args.model, "fitted model JSON")->required();
  audit->add_option("--portfolio", args.portfolio, "portfolio CSV")->required();
  audit->add_option("--horizon", args.horizon, "forecast horizon in periods");
  audit->add_option("--json", args.json_out, "write the audit JSON here");
  audit->add_option("--format", args.format, "stdout format: text|json");

  auto* simulate = app.add_subcommand(
      "simulate", "generate a synthetic panel from a known hazard process");
  simulate->add_option("--spec", args.spec, "generator spec JSON")->required();
  simulate->add_option("--out", args.out, "output panel CSV")->required();

  auto* plot = app.add_subcommand(
      "plot", "render survivor and smoothed hazard curves from a life table CSV");
  plot->add_option("--lifetable", args.lifetable, "life table CSV")->required();
  plot->add_option("--out", args.out, "output SVG path")->required();
  plot->add_option("--bandwidth", args.bandwidth, "smoothing bandwidth in periods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const bool unknown_subcommand =
        dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr ||
        dynamic_cast<const CLI::RequiredError*>(&e) != nullptr;
    std::cerr << "error[" << (unknown_subcommand ? "UnknownSubcommand" : "BadFlag")
              << "]: " << e.what() << "\n";
    return 1;
  }

  try {
    if (lifetable->parsed()) return run_lifetable(args);
    if (fit->parsed()) return run_fit(args);
    if (predict->parsed()) return run_predict(args);
    if (audit->parsed()) return run_audit(args);
    if (simulate->parsed()) return run_simulate(args);
    if (plot->parsed()) return run_plot(args);
  } catch (const Error& e) {
    std::cerr << e.diagnostic() << "\n";
    return e.error_class() == sponsurv::ErrorClass::validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
