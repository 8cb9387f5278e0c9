#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rwheel/wheel.hpp"

namespace rwheel {

struct Attribution {
  std::string attribute;
  std::size_t position = 0;
  double contribution = 0;  // raw, summed over trials
  double percentage = 0;
};

/// Per-attribute share of the winning wheel's force, largest first.
/// Every schema attribute is listed; has_signal is false when the total raw
/// contribution is zero, in which case all percentages are zero.
struct AttributionReport {
  std::string winner_label;
  std::vector<Attribution> entries;
  bool has_signal = false;
};

/// Contribution of one attribute in one trial: every chosen factor containing
/// it adds h * f_winner / |factor|.
double trial_contribution(const TrialResult& trial, std::size_t attribute, std::size_t winner);

AttributionReport aggregate_explanation(const Recommendation& recommendation,
                                        std::span<const AttributeSchema> schema);

/// "A09 17.7%, A11 17.4%, A15 9.1%, others 55.8%"
std::string format_top_attributions(const AttributionReport& report, std::size_t top);

nlohmann::json to_json(const AttributionReport& report);

}  // namespace rwheel
