#include "rwheel/explain.hpp"

#include <algorithm>
#include <cstdio>

namespace rwheel {

double trial_contribution(const TrialResult& trial, std::size_t attribute, std::size_t winner) {
  double eps = 0;
  for (const auto& e : trial.chosen) {
    if (!e.contributes() || !e.factor.contains(attribute)) continue;
    eps += e.weightage * e.forces[winner] / static_cast<double>(e.factor.size());
  }
  return eps;
}

AttributionReport aggregate_explanation(const Recommendation& recommendation,
                                        std::span<const AttributeSchema> schema) {
  AttributionReport report;
  report.winner_label = recommendation.label;
  report.entries.reserve(schema.size());
  for (const auto& a : schema) report.entries.push_back({a.name, a.position, 0.0, 0.0});

  for (const auto& trial : recommendation.trials) {
    for (auto& entry : report.entries) {
      entry.contribution += trial_contribution(trial, entry.position, recommendation.winner);
    }
  }

  double total = 0;
  for (const auto& e : report.entries) total += e.contribution;
  report.has_signal = total > 0;
  if (report.has_signal) {
    for (auto& e : report.entries) e.percentage = 100.0 * e.contribution / total;
  }
  std::ranges::sort(report.entries, [](const Attribution& x, const Attribution& y) {
    if (x.percentage != y.percentage) return x.percentage > y.percentage;
    if (x.attribute != y.attribute) return x.attribute < y.attribute;
    return x.position < y.position;
  });
  return report;
}

std::string format_top_attributions(const AttributionReport& report, std::size_t top) {
  if (!report.has_signal) return "no explanation signal";
  std::string out;
  char buf[64];
  double shown = 0;
  const std::size_t n = std::min(top, report.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = report.entries[i];
    std::snprintf(buf, sizeof buf, "%s%s %.1f%%", i ? ", " : "", e.attribute.c_str(), e.percentage);
    out += buf;
    shown += e.percentage;
  }
  if (n < report.entries.size()) {
    std::snprintf(buf, sizeof buf, ", others %.1f%%", std::max(0.0, 100.0 - shown));
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const AttributionReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"attribute", e.attribute}, {"contribution", e.contribution}, {"percentage", e.percentage}});
  }
  return {{"winner", report.winner_label}, {"has_signal", report.has_signal}, {"attributions", std::move(entries)}};
}

}  // namespace rwheel
