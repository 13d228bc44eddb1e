#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <sponsurv/error.hpp>
#include <sponsurv/panel.hpp>

namespace sponsurv {

// Ordered block specification for hierarchical model entry. Column names come
// from the dummy-expanded pool produced by design_matrix(); reference levels
// (team/jersey_shirt, big-four none, north_america, category other) have no
// column.
struct BlockSpec {
  struct Block {
    std::string name;
    std::vector<std::string> columns;
  };
  std::vector<Block> blocks;
  // When true the four big-four property flags are active only on league
  // sponsorships (interaction coding) instead of plain property indicators.
  bool big_four_interacts_with_league = false;

  static BlockSpec default_spec() {
    BlockSpec spec;
    spec.blocks = {
        {"sponsorship_type",
         {"naming_rights", "event_title", "league", "olympic", "world_cup", "mlb",
          "nba", "nhl", "nfl"}},
        {"economic_conditions", {"gdp_growth", "cpi_inflation"}},
        {"sponsor_location",
         {"africa", "asia", "australia", "europe", "south_america"}},
        {"sponsor_category",
         {"alcoholic_beverage", "non_alcoholic_beverage", "automotive", "insurance",
          "apparel", "retail", "tech", "qsr", "food", "media", "bank", "credit_card",
          "financial_services", "medical_hospitals", "pharmaceutical",
          "personal_care", "airline", "shipping_mail", "utilities_power", "hotel",
          "betting", "tire", "telecom"}},
        {"sponsor_characteristics",
         {"regional_proximity", "congruence", "brand_equity", "b2b",
          "publicly_traded", "clutter"}},
    };
    return spec;
  }
};

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Design matrix in counting-process form: each row carries an at-risk interval
// (start, stop] plus an event flag and a cluster id. Risk sets for every
// distinct event time are precomputed at construction; the object is immutable
// afterwards and safe to share.
class DesignMatrix {
 public:
  struct RiskSet {
    double time = 0.0;
    std::vector<int> deaths;   // rows with stop == time && event
    std::vector<int> at_risk;  // rows with start < time <= stop
  };

  static DesignMatrix from_raw(std::vector<std::string> column_names,
                               std::vector<std::string> column_blocks,
                               RowMatrix values, std::vector<double> start,
                               std::vector<double> stop, std::vector<int> event,
                               std::vector<std::string> cluster_ids) {
    DesignMatrix m;
    const auto n = static_cast<std::size_t>(values.rows());
    if (column_names.size() != static_cast<std::size_t>(values.cols()) ||
        (!column_blocks.empty() && column_blocks.size() != column_names.size()) ||
        start.size() != n || stop.size() != n || event.size() != n ||
        cluster_ids.size() != n) {
      throw Error::validation("DimensionMismatch",
                              "design matrix fields have inconsistent sizes");
    }
    {
      std::set<std::string> seen;
      for (const auto& name : column_names) {
        if (!seen.insert(name).second) {
          throw Error::validation("DimensionMismatch",
                                  "duplicate design column '" + name + "'");
        }
      }
    }
    m.column_names_ = std::move(column_names);
    m.column_blocks_ = column_blocks.empty()
                           ? std::vector<std::string>(m.column_names_.size(), "all")
                           : std::move(column_blocks);
    m.values_ = std::move(values);
    m.start_ = std::move(start);
    m.stop_ = std::move(stop);
    m.event_ = std::move(event);
    m.assign_clusters(cluster_ids);
    m.flag_degenerate_columns();
    m.build_risk_sets();
    return m;
  }

  // Sub-matrix with the leading `k` columns; row structure is shared.
  DesignMatrix leading_columns(std::size_t k) const {
    DesignMatrix m;
    m.column_names_.assign(column_names_.begin(), column_names_.begin() + k);
    m.column_blocks_.assign(column_blocks_.begin(), column_blocks_.begin() + k);
    m.values_ = values_.leftCols(static_cast<Eigen::Index>(k));
    m.start_ = start_;
    m.stop_ = stop_;
    m.event_ = event_;
    m.cluster_index_ = cluster_index_;
    m.cluster_labels_ = cluster_labels_;
    m.degenerate_ = {};
    m.flag_degenerate_columns();
    m.risk_sets_ = risk_sets_;
    m.n_events_ = n_events_;
    return m;
  }

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<std::string>& column_blocks() const { return column_blocks_; }
  const RowMatrix& values() const { return values_; }
  const std::vector<double>& start_times() const { return start_; }
  const std::vector<double>& stop_times() const { return stop_; }
  const std::vector<int>& events() const { return event_; }
  const std::vector<int>& cluster_index() const { return cluster_index_; }
  std::size_t cluster_count() const { return cluster_labels_.size(); }
  const std::vector<std::string>& cluster_labels() const { return cluster_labels_; }
  const std::vector<RiskSet>& risk_sets() const { return risk_sets_; }
  std::size_t event_count() const { return n_events_; }

  // Zero-variance columns; reported, not fatal (fitting rejects them).
  const std::vector<std::string>& degenerate_columns() const { return degenerate_; }

  int column_index(const std::string& name) const {
    auto it = std::find(column_names_.begin(), column_names_.end(), name);
    return it == column_names_.end()
               ? -1
               : static_cast<int>(it - column_names_.begin());
  }

 private:
  void assign_clusters(const std::vector<std::string>& cluster_ids) {
    std::map<std::string, int> index;
    cluster_index_.resize(cluster_ids.size());
    for (std::size_t i = 0; i < cluster_ids.size(); ++i) {
      auto [it, inserted] =
          index.emplace(cluster_ids[i], static_cast<int>(cluster_labels_.size()));
      if (inserted) cluster_labels_.push_back(cluster_ids[i]);
      cluster_index_[i] = it->second;
    }
  }

  void flag_degenerate_columns() {
    degenerate_.clear();
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      const double first = values_(0, c);
      bool constant = true;
      for (Eigen::Index r = 1; r < values_.rows(); ++r) {
        if (values_(r, c) != first) {
          constant = false;
          break;
        }
      }
      if (constant) degenerate_.push_back(column_names_[static_cast<std::size_t>(c)]);
    }
  }

  void build_risk_sets() {
    std::set<double> times;
    n_events_ = 0;
    for (std::size_t i = 0; i < event_.size(); ++i) {
      if (event_[i]) {
        times.insert(stop_[i]);
        ++n_events_;
      }
    }
    risk_sets_.clear();
    risk_sets_.reserve(times.size());
    for (double t : times) {
      RiskSet rs;
      rs.time = t;
      risk_sets_.push_back(std::move(rs));
    }
    std::vector<double> sorted_times(times.begin(), times.end());
    for (int i = 0; i < static_cast<int>(rows()); ++i) {
      // at risk for event times t with start < t <= stop
      auto lo = std::upper_bound(sorted_times.begin(), sorted_times.end(),
                                 start_[static_cast<std::size_t>(i)]);
      auto hi = std::upper_bound(sorted_times.begin(), sorted_times.end(),
                                 stop_[static_cast<std::size_t>(i)]);
      for (auto it = lo; it != hi; ++it) {
        auto& rs = risk_sets_[static_cast<std::size_t>(it - sorted_times.begin())];
        rs.at_risk.push_back(i);
        if (event_[static_cast<std::size_t>(i)] &&
            stop_[static_cast<std::size_t>(i)] == *it) {
          rs.deaths.push_back(i);
        }
      }
    }
  }

  std::vector<std::string> column_names_;
  std::vector<std::string> column_blocks_;
  RowMatrix values_;
  std::vector<double> start_;
  std::vector<double> stop_;
  std::vector<int> event_;
  std::vector<int> cluster_index_;
  std::vector<std::string> cluster_labels_;
  std::vector<std::string> degenerate_;
  std::vector<RiskSet> risk_sets_;
  std::size_t n_events_ = 0;
};

namespace detail {

struct ColumnDef {
  std::string name;
  double (*value)(const PanelObservation&, bool interact);
};

inline double type_dummy(const PanelObservation& o, SponsorshipType t) {
  return o.sponsorship_type == t ? 1.0 : 0.0;
}

inline const std::map<std::string, int>& category_column_index() {
  static const std::map<std::string, int> index = [] {
    std::map<std::string, int> m;
    for (std::size_t i = 1; i < detail::kCategoryTokens.size(); ++i) {
      m[detail::kCategoryTokens[i]] = static_cast<int>(i);
    }
    return m;
  }();
  return index;
}

inline double column_value(const PanelObservation& o, const std::string& name,
                           bool big_four_interaction) {
  if (name == "naming_rights") return type_dummy(o, SponsorshipType::naming_rights);
  if (name == "event_title") return type_dummy(o, SponsorshipType::event_title);
  if (name == "league") return type_dummy(o, SponsorshipType::league);
  if (name == "olympic") return type_dummy(o, SponsorshipType::olympic);
  if (name == "world_cup") return type_dummy(o, SponsorshipType::world_cup);
  if (name == "mlb" || name == "nba" || name == "nhl" || name == "nfl") {
    const bool match = std::string(to_token(o.big_four_property)) == name;
    if (!match) return 0.0;
    if (big_four_interaction && o.sponsorship_type != SponsorshipType::league)
      return 0.0;
    return 1.0;
  }
  if (name == "gdp_growth") return o.gdp_growth;
  if (name == "cpi_inflation") return o.cpi_inflation;
  if (name == "africa") return o.sponsor_location == SponsorLocation::africa;
  if (name == "asia") return o.sponsor_location == SponsorLocation::asia;
  if (name == "australia") return o.sponsor_location == SponsorLocation::australia;
  if (name == "europe") return o.sponsor_location == SponsorLocation::europe;
  if (name == "south_america")
    return o.sponsor_location == SponsorLocation::south_america;
  if (name == "regional_proximity") return o.regional_proximity;
  if (name == "congruence") return o.congruence;
  if (name == "brand_equity") return o.brand_equity;
  if (name == "b2b") return o.b2b;
  if (name == "publicly_traded") return o.publicly_traded;
  if (name == "clutter") return o.clutter;
  auto it = category_column_index().find(name);
  if (it != category_column_index().end()) {
    return static_cast<int>(o.sponsor_category) == it->second ? 1.0 : 0.0;
  }
  throw Error::validation("UnknownBlockColumn",
                          "block specification names unknown column '" + name + "'");
}

}  // namespace detail

// Builds the design matrix for the given block specification. Columns appear
// in block order; counting-process triplets are (period-1, period, event) and
// clusters default to the sponsorship id.
inline DesignMatrix design_matrix(const Dataset& dataset, const BlockSpec& spec) {
  std::vector<std::string> names;
  std::vector<std::string> blocks;
  for (const auto& block : spec.blocks) {
    for (const auto& column : block.columns) {
      names.push_back(column);
      blocks.push_back(block.name);
    }
  }
  if (names.empty()) {
    throw Error::validation("UnknownBlockColumn",
                            "block specification contains no columns");
  }

  const auto& obs = dataset.observations();
  RowMatrix values(static_cast<Eigen::Index>(obs.size()),
                   static_cast<Eigen::Index>(names.size()));
  std::vector<double> start(obs.size()), stop(obs.size());
  std::vector<int> event(obs.size());
  std::vector<std::string> clusters(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          detail::column_value(obs[i], names[c], spec.big_four_interacts_with_league);
    }
    start[i] = obs[i].period - 1.0;
    stop[i] = obs[i].period;
    event[i] = obs[i].event ? 1 : 0;
    clusters[i] = obs[i].sponsorship_id;
  }
  return DesignMatrix::from_raw(std::move(names), std::move(blocks),
                                std::move(values), std::move(start),
                                std::move(stop), std::move(event),
                                std::move(clusters));
}

}  // namespace sponsurv
