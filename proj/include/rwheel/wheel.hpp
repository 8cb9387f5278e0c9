#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwheel/dataset.hpp"
#include "rwheel/factors.hpp"
#include "rwheel/random.hpp"

namespace rwheel {

struct WheelConfig {
  std::size_t depth = 3;
  double noise_fraction = 0.5;
  std::size_t trials = 100;
  std::size_t importance_shuffles = 100;
  double neighbor_window = 0.5;  // neighbors lie within value +/- window * sigma
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  bool operator==(const WheelConfig&) const = default;
};

/// Trained classifier. Instance-based: the training records are kept and
/// queried at recommendation time. Immutable once constructed.
class RandomWheelModel {
 public:
  /// Derives priors and sigmas from `dataset`.
  RandomWheelModel(Dataset dataset, FactorTable factor_table, WheelConfig config);

  /// Restores a persisted model; throws ModelFormatError unless `priors` and
  /// `sigmas` are bit-identical to the values recomputed from `dataset`.
  RandomWheelModel(Dataset dataset, FactorTable factor_table, WheelConfig config, std::vector<double> priors,
                   std::vector<std::optional<double>> sigmas);

  const Dataset& dataset() const { return dataset_; }
  const FactorTable& factor_table() const { return factor_table_; }
  const std::vector<double>& priors() const { return priors_; }
  /// Population sigma per attribute; nullopt for categorical or all-missing columns.
  const std::vector<std::optional<double>>& sigmas() const { return sigmas_; }
  const WheelConfig& config() const { return config_; }

 private:
  Dataset dataset_;
  FactorTable factor_table_;
  std::vector<double> priors_;
  std::vector<std::optional<double>> sigmas_;
  WheelConfig config_;
};

/// Builds the factor table and freezes priors and sigmas.
/// Throws DomainError when a class has no training records or no factor is informative.
RandomWheelModel train(const Dataset& dataset, const WheelConfig& config, std::size_t workers = 1);

struct Neighborhood {
  Factor factor;
  std::vector<std::size_t> records;  // training record indices
};

/// Training records agreeing with the observation on every factor attribute:
/// equal tokens for categorical attributes, |value - v| <= window * sigma for
/// numeric ones. Records missing any factor attribute are excluded.
/// The observation must have non-missing values for the factor's attributes.
Neighborhood extract_neighborhood(const RandomWheelModel& model, const Factor& factor,
                                  const Observation& observation);

std::vector<std::size_t> class_counts(const Dataset& dataset, const Neighborhood& neighborhood);

/// Scaled Gini coefficient of neighborhood class counts:
///   h = m/(m-1) * (sum n_j^2 / (sum n_j)^2 - 1/m),
/// which for two classes is 2 (n1^2 + n2^2) / (n1 + n2)^2 - 1.
/// Throws DomainError for an empty neighborhood.
double weightage(std::span<const std::size_t> counts);

/// Lift of class j: its neighborhood frequency over its training prior.
/// Throws DomainError for an empty neighborhood or a zero prior.
double elementary_force(std::span<const std::size_t> counts, std::span<const double> priors, std::size_t j);

/// Weightage and per-class forces of one chosen factor. When the neighborhood
/// is empty the factor contributes nothing and weightage/forces are zero.
struct FactorEvidence {
  Factor factor;
  std::size_t neighbor_count = 0;
  double weightage = 0;
  std::vector<double> forces;

  bool contributes() const { return neighbor_count > 0; }
};

/// Per-class resultant force: sum of h * f_j over the contributing factors.
std::vector<double> resultant_force(std::span<const FactorEvidence> chosen, std::size_t classes);

struct TrialResult {
  std::size_t trial_index = 0;
  std::vector<FactorEvidence> chosen;  // top-n_i usable factors, rank order
  std::vector<double> forces;          // per class: sum over chosen of h * f_j
  std::vector<double> velocities;      // per class angular velocity
};

struct Recommendation {
  std::size_t winner = 0;
  std::string label;
  std::vector<double> aggregate_velocity;  // mean velocity per class over trials
  double confidence = 0;
  std::vector<TrialResult> trials;
};

/// Stable 64-bit identity of an observation's canonical text form.
std::uint64_t observation_fingerprint(const Observation& observation);

/// Random stream for one trial: derived from (model seed, observation, trial index).
Rng trial_stream(const RandomWheelModel& model, const Observation& observation, std::size_t trial_index);

/// One randomized trial. Draws n_i uniformly from [1, ceil(noise_fraction * U)]
/// where U is the number of factors whose attributes are all present in the
/// observation, takes the top n_i of those, and sums h * f_j per class.
/// Throws UnclassifiableError when U = 0.
TrialResult run_trial(const RandomWheelModel& model, const Observation& observation, std::size_t trial_index,
                      Rng& rng);

/// Winner index (ties go to the earlier class token) and confidence
/// (winner - runner_up) / winner, or 0 when the winner's velocity is 0.
struct Verdict {
  std::size_t winner = 0;
  double confidence = 0;
};
Verdict decide(std::span<const double> aggregate_velocity);

/// Runs config().trials trials with per-trial streams from trial_stream and
/// aggregates their velocities by mean.
/// Throws SchemaError for a malformed observation and UnclassifiableError when
/// no factor can be evaluated.
Recommendation recommend(const RandomWheelModel& model, const Observation& observation);

}  // namespace rwheel
