#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sponsurv/cox.hpp>
#include <sponsurv/forecast.hpp>
#include <sponsurv/life_table.hpp>
#include <sponsurv/model_io.hpp>

namespace sponsurv {

namespace fmt {

inline std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return std::string(buf);
}

inline std::string probability(double value) { return fixed(value, 4); }

// Currency in millions with two decimals.
inline std::string money_millions(double value) {
  return "$" + fixed(value / 1e6, 2) + "M";
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace fmt

// ---------------------------------------------------------------------------
// Life table
// ---------------------------------------------------------------------------

inline std::string life_table_text(const LifeTable& table) {
  std::ostringstream out;
  out << fmt::pad_left("period", 7) << fmt::pad_left("beginning", 11)
      << fmt::pad_left("ended", 7) << fmt::pad_left("censored", 10)
      << fmt::pad_left("hazard", 9) << fmt::pad_left("survivor", 10) << "\n";
  for (const auto& r : table.rows) {
    out << fmt::pad_left(std::to_string(r.period), 7)
        << fmt::pad_left(std::to_string(r.beginning), 11)
        << fmt::pad_left(std::to_string(r.ended), 7)
        << fmt::pad_left(std::to_string(r.censored), 10)
        << fmt::pad_left(fmt::probability(r.hazard), 9)
        << fmt::pad_left(fmt::probability(r.survivor), 10) << "\n";
  }
  const auto [hazard, renewal] = overall_hazard(table);
  const auto median = median_lifetime(survivor_curve(table));
  out << "spells: " << (table.rows.empty() ? 0 : table.rows.front().beginning)
      << " (" << table.total_events() << " ended, "
      << table.rows.front().beginning - table.total_events()
      << " censored); observations: " << table.total_at_risk() << "\n";
  out << "overall hazard rate: " << fmt::probability(hazard)
      << " / renewal rate: " << fmt::fixed(renewal * 100.0, 1) << "%"
      << " / median lifetime: "
      << (median ? fmt::fixed(*median, 2) + " years"
                 : std::string("undefined (curve floor above .5)"))
      << "\n";
  return out.str();
}

inline json life_table_to_json(const LifeTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"period", r.period},
                    {"beginning", r.beginning},
                    {"ended", r.ended},
                    {"censored", r.censored},
                    {"hazard", r.hazard},
                    {"survivor", r.survivor}});
  }
  const auto [hazard, renewal] = overall_hazard(table);
  const auto median = median_lifetime(survivor_curve(table));
  json j;
  j["rows"] = rows;
  j["overall_hazard"] = hazard;
  j["renewal_rate"] = renewal;
  if (median) {
    j["median_lifetime"] = *median;
  } else {
    j["median_lifetime"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Hierarchical fit report
// ---------------------------------------------------------------------------

/// Per-model grid of robust z statistics with significance stars and robust
/// standard errors in parentheses, followed by fit statistics and the Wald
/// test of each newly entered block.
inline std::string fit_report_text(const HierarchicalResult& result) {
  std::ostringstream out;
  const std::size_t n_models = result.models.size();
  const auto& final_report = result.reports.back();

  out << "Cox proportional hazards, hierarchical entry (" << n_models
      << " models, ties: " << to_token(result.ties) << ")\n";
  out << "z = coefficient / robust SE (clustered); robust SE in parentheses\n\n";

  std::size_t label_width = 12;
  for (const auto& row : final_report.rows) {
    label_width = std::max(label_width, row.name.size() + 2);
  }
  constexpr std::size_t cell_width = 18;

  out << fmt::pad_right("variable", label_width);
  for (std::size_t k = 0; k < n_models; ++k) {
    out << fmt::pad_left("Model " + std::to_string(k + 1), cell_width);
  }
  out << "\n";

  std::string current_block;
  for (std::size_t r = 0; r < final_report.rows.size(); ++r) {
    const auto& final_row = final_report.rows[r];
    if (final_row.block != current_block) {
      current_block = final_row.block;
      out << current_block << "\n";
    }
    out << fmt::pad_right("  " + final_row.name, label_width);
    for (std::size_t k = 0; k < n_models; ++k) {
      const auto& report = result.reports[k];
      if (r < report.rows.size()) {
        const auto& row = report.rows[r];
        const std::string cell = fmt::fixed(row.z, 2) + fmt::stars(row.p) + " (" +
                                 fmt::fixed(row.se_robust, 2) + ")";
        out << fmt::pad_left(cell, cell_width);
      } else {
        out << fmt::pad_left("", cell_width);
      }
    }
    out << "\n";
  }

  out << "\n";
  auto footer = [&](const std::string& label, auto value_of) {
    out << fmt::pad_right(label, label_width);
    for (std::size_t k = 0; k < n_models; ++k) {
      out << fmt::pad_left(value_of(result.reports[k]), cell_width);
    }
    out << "\n";
  };
  footer("AIC", [](const FitReport& r) { return fmt::fixed(r.aic, 1); });
  footer("BIC", [](const FitReport& r) { return fmt::fixed(r.bic, 1); });
  footer("Log-likelihood",
         [](const FitReport& r) { return fmt::fixed(r.log_likelihood, 1); });
  footer("Wald chi2 (new block)", [](const FitReport& r) {
    return fmt::fixed(r.entered_block.chi2, 2) + fmt::stars(r.entered_block.p) +
           " df=" + std::to_string(r.entered_block.df);
  });

  if (!result.vif_table.empty()) {
    double max_vif = 0.0, sum_vif = 0.0;
    for (const auto& [name, v] : result.vif_table) {
      max_vif = std::max(max_vif, v);
      sum_vif += v;
    }
    out << "\nVIF (full design): max " << fmt::fixed(max_vif, 2) << ", mean "
        << fmt::fixed(sum_vif / result.vif_table.size(), 2) << "\n";
  }

  out << "\nFinal model detail (hazard ratios, 95% CI from robust SE)\n";
  out << fmt::pad_right("variable", label_width) << fmt::pad_left("beta", 9)
      << fmt::pad_left("SE", 8) << fmt::pad_left("z", 8) << fmt::pad_left("p", 8)
      << fmt::pad_left("HR", 8) << fmt::pad_left("95% CI", 17) << "  effect\n";
  for (const auto& row : final_report.rows) {
    out << fmt::pad_right("  " + row.name, label_width)
        << fmt::pad_left(fmt::fixed(row.beta, 4), 9)
        << fmt::pad_left(fmt::fixed(row.se_robust, 4), 8)
        << fmt::pad_left(fmt::fixed(row.z, 2), 8)
        << fmt::pad_left(fmt::fixed(row.p, 3), 8)
        << fmt::pad_left(fmt::fixed(row.hazard_ratio, 3), 8)
        << fmt::pad_left("[" + fmt::fixed(row.ci_low, 3) + ", " +
                             fmt::fixed(row.ci_high, 3) + "]",
                         17)
        << "  " << row.percent_phrase << "\n";
  }
  out << "significance: * p < .05; ** p < .01; *** p < .001\n";
  return out.str();
}

inline json fit_report_to_json(const HierarchicalResult& result) {
  json models = json::array();
  for (std::size_t k = 0; k < result.reports.size(); ++k) {
    const auto& report = result.reports[k];
    json rows = json::array();
    for (const auto& row : report.rows) {
      rows.push_back({{"name", row.name},
                      {"block", row.block},
                      {"beta", row.beta},
                      {"se_robust", row.se_robust},
                      {"z", row.z},
                      {"p", row.p},
                      {"stars", fmt::stars(row.p)},
                      {"hazard_ratio", row.hazard_ratio},
                      {"ci_low", row.ci_low},
                      {"ci_high", row.ci_high},
                      {"effect", row.percent_phrase}});
    }
    models.push_back({{"model", k + 1},
                      {"rows", rows},
                      {"aic", report.aic},
                      {"bic", report.bic},
                      {"log_likelihood", report.log_likelihood},
                      {"k_parameters", report.k_parameters},
                      {"wald_new_block",
                       {{"block", report.entered_block.name},
                        {"chi2", report.entered_block.chi2},
                        {"df", report.entered_block.df},
                        {"p", report.entered_block.p},
                        {"stars", fmt::stars(report.entered_block.p)}}}});
  }
  json vif = json::array();
  for (const auto& [name, value] : result.vif_table) {
    vif.push_back({{"name", name}, {"vif", value}});
  }
  json j;
  j["ties"] = to_token(result.ties);
  j["n_observations"] = result.n_observations;
  j["n_spells"] = result.n_spells;
  j["models"] = models;
  j["vif"] = vif;
  j["significance_legend"] = "* p < .05; ** p < .01; *** p < .001";
  return j;
}

// ---------------------------------------------------------------------------
// Forecasts and audits
// ---------------------------------------------------------------------------

inline json forecast_report_to_json(const ForecastReport& report,
                                    const CovariateProfile& profile) {
  json curve = json::array();
  for (std::size_t t = 0; t < report.curve.values.size(); ++t) {
    curve.push_back({{"period", t}, {"survivor", report.curve.values[t]}});
  }
  json j;
  if (!profile.id.empty()) j["id"] = profile.id;
  j["current_tenure"] = profile.current_tenure;
  j["annual_fee"] = profile.annual_fee;
  j["horizon"] = report.horizon;
  j["renewal_next_period"] = report.renewal_next_period;
  j["expected_duration"] = report.expected_total_years;
  j["expected_remaining_years"] = report.expected_remaining_years;
  j["expected_revenue"] = report.expected_total_revenue;
  j["truncation_warning"] = report.truncation_warning;
  j["survival_curve"] = curve;
  return j;
}

inline std::string forecast_report_text(const ForecastReport& report,
                                        const CovariateProfile& profile) {
  std::ostringstream out;
  if (!profile.id.empty()) out << "sponsor: " << profile.id << "\n";
  out << "current tenure: " << profile.current_tenure << " years\n";
  out << "next-period renewal probability: "
      << fmt::probability(report.renewal_next_period) << "\n";
  out << "expected total duration: " << fmt::fixed(report.expected_total_years, 2)
      << " years (" << fmt::fixed(report.expected_remaining_years, 2)
      << " remaining)\n";
  out << "expected total revenue: "
      << fmt::money_millions(report.expected_total_revenue) << " at "
      << fmt::money_millions(profile.annual_fee) << "/year\n";
  out << "horizon: " << report.horizon << " periods\n";
  return out.str();
}

inline json audit_to_json(const std::vector<AuditEntry>& entries) {
  json sponsors = json::array();
  for (const auto& e : entries) {
    sponsors.push_back({{"sponsorship_id", e.id},
                        {"current_tenure", e.current_tenure},
                        {"exit_within_1yr", e.exit_within_1yr},
                        {"exit_within_2yr", e.exit_within_2yr},
                        {"expected_remaining_years", e.expected_remaining_years},
                        {"expected_remaining_revenue", e.expected_remaining_revenue}});
  }
  json j;
  j["sponsors"] = sponsors;
  j["ranked_by"] = "exit_within_2yr desc";
  return j;
}

inline std::string audit_text(const std::vector<AuditEntry>& entries) {
  std::ostringstream out;
  std::size_t id_width = 14;
  for (const auto& e : entries) id_width = std::max(id_width, e.id.size() + 2);
  out << fmt::pad_right("sponsorship_id", id_width) << fmt::pad_left("tenure", 8)
      << fmt::pad_left("exit 1yr", 10) << fmt::pad_left("exit 2yr", 10)
      << fmt::pad_left("yrs left", 10) << fmt::pad_left("revenue left", 14) << "\n";
  for (const auto& e : entries) {
    out << fmt::pad_right(e.id, id_width)
        << fmt::pad_left(std::to_string(e.current_tenure), 8)
        << fmt::pad_left(fmt::probability(e.exit_within_1yr), 10)
        << fmt::pad_left(fmt::probability(e.exit_within_2yr), 10)
        << fmt::pad_left(fmt::fixed(e.expected_remaining_years, 2), 10)
        << fmt::pad_left(fmt::money_millions(e.expected_remaining_revenue), 14)
        << "\n";
  }
  out << "(ranked by two-year exit probability, most at risk first)\n";
  return out.str();
}

}  // namespace sponsurv
