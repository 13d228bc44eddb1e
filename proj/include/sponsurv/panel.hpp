#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <sponsurv/csv.hpp>
#include <sponsurv/error.hpp>

namespace sponsurv {

// ---------------------------------------------------------------------------
// Categorical domains
// ---------------------------------------------------------------------------

enum class SponsorshipType {
  naming_rights,
  event_title,
  league,
  jersey_shirt,
  team,
  olympic,
  world_cup,
};

enum class BigFourProperty { none, mlb, nba, nhl, nfl };

enum class SponsorLocation {
  africa,
  asia,
  australia,
  europe,
  north_america,
  south_america,
};

// 23 named high-demand categories plus the residual "other".
enum class SponsorCategory {
  other,
  alcoholic_beverage,
  non_alcoholic_beverage,
  automotive,
  insurance,
  apparel,
  retail,
  tech,
  qsr,
  food,
  media,
  bank,
  credit_card,
  financial_services,
  medical_hospitals,
  pharmaceutical,
  personal_care,
  airline,
  shipping_mail,
  utilities_power,
  hotel,
  betting,
  tire,
  telecom,
};

namespace detail {

inline constexpr std::array<const char*, 7> kTypeTokens = {
    "naming_rights", "event_title", "league", "jersey_shirt",
    "team",          "olympic",     "world_cup"};

inline constexpr std::array<const char*, 5> kBigFourTokens = {"none", "mlb", "nba",
                                                              "nhl", "nfl"};

inline constexpr std::array<const char*, 6> kLocationTokens = {
    "africa", "asia", "australia", "europe", "north_america", "south_america"};

inline constexpr std::array<const char*, 24> kCategoryTokens = {
    "other",          "alcoholic_beverage", "non_alcoholic_beverage",
    "automotive",     "insurance",          "apparel",
    "retail",         "tech",               "qsr",
    "food",           "media",              "bank",
    "credit_card",    "financial_services", "medical_hospitals",
    "pharmaceutical", "personal_care",      "airline",
    "shipping_mail",  "utilities_power",    "hotel",
    "betting",        "tire",               "telecom"};

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <std::size_t N>
int token_index(const std::array<const char*, N>& tokens, const std::string& value) {
  for (std::size_t i = 0; i < N; ++i) {
    if (value == tokens[i]) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace detail

inline const char* to_token(SponsorshipType t) {
  return detail::kTypeTokens[static_cast<int>(t)];
}
inline const char* to_token(BigFourProperty t) {
  return detail::kBigFourTokens[static_cast<int>(t)];
}
inline const char* to_token(SponsorLocation t) {
  return detail::kLocationTokens[static_cast<int>(t)];
}
inline const char* to_token(SponsorCategory t) {
  return detail::kCategoryTokens[static_cast<int>(t)];
}

inline const std::array<const char*, 24>& sponsor_category_tokens() {
  return detail::kCategoryTokens;
}

// ---------------------------------------------------------------------------
// Panel rows and spells
// ---------------------------------------------------------------------------

// One sponsorship-year. `period` is the 1-based year index within the
// sponsorship; `event` marks the year in which the sponsorship ended.
struct PanelObservation {
  std::string sponsorship_id;
  int period = 1;
  SponsorshipType sponsorship_type = SponsorshipType::team;
  BigFourProperty big_four_property = BigFourProperty::none;
  double gdp_growth = 0.0;
  double cpi_inflation = 0.0;
  SponsorLocation sponsor_location = SponsorLocation::north_america;
  SponsorCategory sponsor_category = SponsorCategory::other;
  bool regional_proximity = false;
  bool congruence = false;
  bool brand_equity = false;
  bool b2b = false;
  bool publicly_traded = false;
  int clutter = 1;
  bool event = false;
};

// One sponsorship's compressed history. `ended == false` means the spell is
// right-censored: it was still running when last observed.
struct SponsorshipSpell {
  std::string sponsorship_id;
  int duration = 0;
  bool ended = false;
  std::string cluster_id;
};

// Immutable, validated panel. Observations are sorted by (id, period) and
// per-sponsorship periods form a contiguous run 1..d with the event flag, if
// any, on the final period only.
class Dataset {
 public:
  static Dataset from_observations(std::vector<PanelObservation> observations) {
    std::stable_sort(observations.begin(), observations.end(),
                     [](const PanelObservation& a, const PanelObservation& b) {
                       if (a.sponsorship_id != b.sponsorship_id)
                         return a.sponsorship_id < b.sponsorship_id;
                       return a.period < b.period;
                     });
    validate(observations);
    Dataset d;
    d.observations_ = std::move(observations);
    d.spell_count_ = count_spells(d.observations_);
    return d;
  }

  const std::vector<PanelObservation>& observations() const { return observations_; }
  std::size_t observation_count() const { return observations_.size(); }
  std::size_t spell_count() const { return spell_count_; }

 private:
  static void check_ranges(const PanelObservation& o) {
    const std::string where = "sponsorship '" + o.sponsorship_id + "', period " +
                              std::to_string(o.period);
    if (o.period < 1) {
      throw Error::validation("InvalidValue", where + ": period must be >= 1");
    }
    if (o.clutter < 1) {
      throw Error::validation("InvalidValue", where + ": clutter must be >= 1");
    }
    if (o.gdp_growth < -100.0 || o.gdp_growth > 100.0) {
      throw Error::validation("InvalidValue",
                              where + ": gdp_growth outside [-100, 100]");
    }
    if (o.cpi_inflation < -100.0 || o.cpi_inflation > 5000.0) {
      throw Error::validation("InvalidValue",
                              where + ": cpi_inflation outside [-100, 5000]");
    }
  }

  static void validate(const std::vector<PanelObservation>& obs) {
    std::size_t i = 0;
    while (i < obs.size()) {
      std::size_t j = i;
      while (j < obs.size() && obs[j].sponsorship_id == obs[i].sponsorship_id) ++j;
      // one sponsorship in [i, j)
      for (std::size_t k = i; k < j; ++k) {
        check_ranges(obs[k]);
        const int expected = static_cast<int>(k - i) + 1;
        if (obs[k].period != expected) {
          throw Error::validation(
              "NonContiguousPeriods",
              "sponsorship '" + obs[i].sponsorship_id +
                  "': periods must run 1..d without gaps or duplicates (saw " +
                  std::to_string(obs[k].period) + " where " +
                  std::to_string(expected) + " was expected)");
        }
        if (obs[k].event && k + 1 != j) {
          throw Error::validation(
              "EventNotTerminal",
              "sponsorship '" + obs[i].sponsorship_id +
                  "': event flagged on period " + std::to_string(obs[k].period) +
                  " which is not the final observed period");
        }
      }
      i = j;
    }
  }

  static std::size_t count_spells(const std::vector<PanelObservation>& obs) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (i == 0 || obs[i].sponsorship_id != obs[i - 1].sponsorship_id) ++n;
    }
    return n;
  }

  std::vector<PanelObservation> observations_;
  std::size_t spell_count_ = 0;
};

// ---------------------------------------------------------------------------
// CSV input/output
// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, 15> kPanelColumns = {
    "sponsorship_id", "period",        "sponsorship_type", "big_four_property",
    "gdp_growth",     "cpi_inflation", "sponsor_location", "sponsor_category",
    "regional_proximity", "congruence", "brand_equity",    "b2b",
    "publicly_traded", "clutter",      "event"};

namespace detail {

template <std::size_t N>
int parse_enum(const std::array<const char*, N>& tokens, const std::string& raw,
               std::size_t row, const char* column) {
  const std::string value = lower(csv::trim(raw));
  const int idx = token_index(tokens, value);
  if (idx < 0) {
    throw Error::validation("BadEnumToken", "row " + std::to_string(row) +
                                                ", column '" + column +
                                                "': unknown token '" + value + "'");
  }
  return idx;
}

}  // namespace detail

// Parses the panel CSV format. The header must contain at least the fifteen
// panel columns (any order, extras ignored); rows need not be sorted.
inline Dataset parse_panel_csv(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) {
    throw Error::validation("EmptyInput", "panel file is empty");
  }
  std::map<std::string, std::size_t> header;
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    header[detail::lower(csv::trim(rows[0][c]))] = c;
  }
  std::array<std::size_t, kPanelColumns.size()> col{};
  for (std::size_t k = 0; k < kPanelColumns.size(); ++k) {
    auto it = header.find(kPanelColumns[k]);
    if (it == header.end()) {
      throw Error::validation("MissingColumn", std::string("required column '") +
                                                   kPanelColumns[k] +
                                                   "' not found in header");
    }
    col[k] = it->second;
  }
  if (rows.size() == 1) {
    throw Error::validation("EmptyInput", "panel file has a header but no rows");
  }

  std::vector<PanelObservation> obs;
  obs.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::size_t needed =
        1 + *std::max_element(col.begin(), col.end());
    if (cells.size() < needed) {
      throw Error::validation("InvalidValue", "row " + std::to_string(r) +
                                                  ": expected at least " +
                                                  std::to_string(needed) +
                                                  " fields, got " +
                                                  std::to_string(cells.size()));
    }
    PanelObservation o;
    o.sponsorship_id = csv::trim(cells[col[0]]);
    if (o.sponsorship_id.empty()) {
      throw Error::validation("InvalidValue",
                              "row " + std::to_string(r) + ": empty sponsorship_id");
    }
    o.period = static_cast<int>(csv::parse_long(cells[col[1]], r, "period"));
    o.sponsorship_type = static_cast<SponsorshipType>(
        detail::parse_enum(detail::kTypeTokens, cells[col[2]], r, "sponsorship_type"));
    {
      const std::string raw = detail::lower(csv::trim(cells[col[3]]));
      o.big_four_property =
          raw.empty() ? BigFourProperty::none
                      : static_cast<BigFourProperty>(detail::parse_enum(
                            detail::kBigFourTokens, raw, r, "big_four_property"));
    }
    o.gdp_growth = csv::parse_double(cells[col[4]], r, "gdp_growth");
    o.cpi_inflation = csv::parse_double(cells[col[5]], r, "cpi_inflation");
    o.sponsor_location = static_cast<SponsorLocation>(detail::parse_enum(
        detail::kLocationTokens, cells[col[6]], r, "sponsor_location"));
    o.sponsor_category = static_cast<SponsorCategory>(detail::parse_enum(
        detail::kCategoryTokens, cells[col[7]], r, "sponsor_category"));
    o.regional_proximity = csv::parse_bool01(cells[col[8]], r, "regional_proximity");
    o.congruence = csv::parse_bool01(cells[col[9]], r, "congruence");
    o.brand_equity = csv::parse_bool01(cells[col[10]], r, "brand_equity");
    o.b2b = csv::parse_bool01(cells[col[11]], r, "b2b");
    o.publicly_traded = csv::parse_bool01(cells[col[12]], r, "publicly_traded");
    o.clutter = static_cast<int>(csv::parse_long(cells[col[13]], r, "clutter"));
    o.event = csv::parse_bool01(cells[col[14]], r, "event");
    obs.push_back(std::move(o));
  }
  return Dataset::from_observations(std::move(obs));
}

inline void write_panel_csv(const Dataset& dataset, std::ostream& out) {
  for (std::size_t k = 0; k < kPanelColumns.size(); ++k) {
    out << (k ? "," : "") << kPanelColumns[k];
  }
  out << "\n";
  for (const auto& o : dataset.observations()) {
    out << o.sponsorship_id << ',' << o.period << ',' << to_token(o.sponsorship_type)
        << ',' << to_token(o.big_four_property) << ','
        << csv::format_double(o.gdp_growth) << ','
        << csv::format_double(o.cpi_inflation) << ',' << to_token(o.sponsor_location)
        << ',' << to_token(o.sponsor_category) << ',' << (o.regional_proximity ? 1 : 0)
        << ',' << (o.congruence ? 1 : 0) << ',' << (o.brand_equity ? 1 : 0) << ','
        << (o.b2b ? 1 : 0) << ',' << (o.publicly_traded ? 1 : 0) << ',' << o.clutter
        << ',' << (o.event ? 1 : 0) << "\n";
  }
}

// Collapses the panel to one spell per sponsorship. Validation has already
// guaranteed contiguity, so duration is the last period.
inline std::vector<SponsorshipSpell> spells_from_panel(const Dataset& dataset) {
  std::vector<SponsorshipSpell> spells;
  spells.reserve(dataset.spell_count());
  const auto& obs = dataset.observations();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i + 1 == obs.size() || obs[i + 1].sponsorship_id != obs[i].sponsorship_id) {
      SponsorshipSpell s;
      s.sponsorship_id = obs[i].sponsorship_id;
      s.duration = obs[i].period;
      s.ended = obs[i].event;
      s.cluster_id = obs[i].sponsorship_id;
      spells.push_back(std::move(s));
    }
  }
  return spells;
}

}  // namespace sponsurv
