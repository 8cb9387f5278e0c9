#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rwheel/dataset.hpp"
#include "rwheel/wheel.hpp"

namespace rwheel {

/// Counts indexed [actual][predicted].
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  void add(std::size_t actual, std::size_t predicted, std::size_t count = 1);
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const { return classes_; }
  std::size_t count(std::size_t actual, std::size_t predicted) const { return counts_[actual * classes_ + predicted]; }
  std::size_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

/// Precision and F-measure are averaged with class-support (actual count)
/// weights. Classes never predicted get precision 0 and are listed in
/// `classes_without_predictions`.
struct MetricsReport {
  double accuracy = 0;
  double precision = 0;
  double f_measure = 0;
  double kappa = 0;
  std::vector<std::size_t> classes_without_predictions;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws DomainError on an empty matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct InstanceOutcome {
  std::size_t record = 0;  // index into the evaluated dataset
  std::size_t fold = 0;
  std::size_t actual = 0;
  std::optional<std::size_t> predicted;  // nullopt when unclassifiable
  double confidence = 0;
  bool correct = false;
  bool has_explanation = false;
  std::vector<double> attribution;  // percentage per attribute position
};

struct RankedConfidence {
  double confidence = 0;
  bool correct = false;
};

struct ConfidenceSplit {
  std::optional<double> correct_mean;
  std::optional<double> incorrect_mean;
  std::size_t correct_count = 0;
  std::size_t incorrect_count = 0;
  std::vector<RankedConfidence> ranked;  // descending confidence
};

/// Splits classified instances into correct and incorrect recommendations.
/// A side with no instances has no mean. Throws DomainError on an empty ledger.
ConfidenceSplit confidence_split(std::span<const InstanceOutcome> ledger);

struct CrossValidationResult {
  ConfusionMatrix confusion{2};
  MetricsReport metrics;
  ConfidenceSplit confidence;
  std::vector<InstanceOutcome> instances;  // ordered by record index
  std::size_t unclassifiable = 0;
};

/// Stratified k-fold cross-validation. Fold f trains with config.seed + f;
/// folds run on up to `workers` threads with results independent of the
/// worker count.
CrossValidationResult cross_validate(const Dataset& dataset, const WheelConfig& config, std::size_t k,
                                     std::uint64_t seed, std::size_t workers = 1);

/// Writes correct.csv and wrong.csv into `dir` (created if needed): one
/// confidence per line, descending.
void write_confidence_csvs(const ConfidenceSplit& split, const std::filesystem::path& dir);

/// Published scores of reference classifiers on the credit-approval data,
/// shown as a footer next to our own numbers.
struct ReferenceScore {
  std::string_view classifier;
  std::string_view code;
  double accuracy;
  double precision;
  double f_measure;
  double kappa;
};
extern const std::array<ReferenceScore, 11> kReferenceScores;

std::string format_metrics_table(const CrossValidationResult& result, std::span<const std::string> class_tokens);
nlohmann::json to_json(const MetricsReport& metrics);
nlohmann::json to_json(const CrossValidationResult& result, std::span<const std::string> class_tokens);

}  // namespace rwheel
