#include "rwheel/wheel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rwheel/error.hpp"

namespace rwheel {

void WheelConfig::validate() const {
  if (depth < 1) throw ConfigError("depth must be >= 1");
  if (!(noise_fraction > 0 && noise_fraction <= 1)) throw ConfigError("noise fraction must be in (0, 1]");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (importance_shuffles < 1) throw ConfigError("importance shuffles must be >= 1");
  if (!(neighbor_window > 0) || !std::isfinite(neighbor_window)) throw ConfigError("neighbor window must be > 0");
}

namespace {

std::vector<std::optional<double>> compute_sigmas(const Dataset& dataset) {
  std::vector<std::optional<double>> sigmas(dataset.attribute_count());
  for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
    if (dataset.schema()[a].kind == AttributeKind::categorical) continue;
    try {
      sigmas[a] = attribute_stddev(dataset, a);
    } catch (const DomainError&) {
      // every value missing: no factor over this attribute is usable
    }
  }
  return sigmas;
}

void check_model_invariants(const Dataset& dataset, const FactorTable& table, const std::vector<double>& priors) {
  if (table.scores.empty()) throw DomainError("factor table is empty");
  for (const auto& s : table.scores) {
    for (std::size_t a : s.factor.attributes()) {
      if (a >= dataset.attribute_count()) throw DomainError("factor attribute out of range");
    }
  }
  for (std::size_t j = 0; j < priors.size(); ++j) {
    if (priors[j] <= 0) throw DomainError("class " + dataset.class_tokens()[j] + " has no training records");
  }
}

bool value_matches(const Value& observed, const Value& candidate, std::optional<double> sigma, double window) {
  if (is_missing(candidate)) return false;
  if (const auto* c = std::get_if<Categorical>(&observed)) {
    const auto* other = std::get_if<Categorical>(&candidate);
    return other && other->token == c->token;
  }
  if (!sigma) return false;
  const double v = numeric_value(observed);
  const double x = numeric_value(candidate);
  const double half_width = window * *sigma;
  return v - half_width <= x && x <= v + half_width;
}

FactorEvidence evidence_from_counts(const Factor& factor, std::span<const std::size_t> counts,
                                    std::span<const double> priors) {
  FactorEvidence e{factor, 0, 0, std::vector<double>(counts.size(), 0.0)};
  for (std::size_t c : counts) e.neighbor_count += c;
  if (e.neighbor_count == 0) return e;
  e.weightage = weightage(counts);
  for (std::size_t j = 0; j < counts.size(); ++j) e.forces[j] = elementary_force(counts, priors, j);
  return e;
}

using Bits = std::vector<std::uint64_t>;

// Per-observation state shared by all trials: the usable slice of the factor
// table and, lazily, each usable factor's evidence. Neighborhoods are built by
// AND-ing per-attribute match bitsets over the training records.
class TrialPlanner {
 public:
  TrialPlanner(const RandomWheelModel& model, const Observation& observation) : model_(model) {
    const auto& dataset = model.dataset();
    const auto& table = model.factor_table().scores;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto attrs = table[i].factor.attributes();
      if (std::ranges::none_of(attrs, [&](std::size_t a) { return is_missing(observation[a]); })) {
        usable_.push_back(i);
      }
    }
    if (usable_.empty()) {
      throw UnclassifiableError("observation is unclassifiable: every factor touches a missing attribute");
    }
    // ceil(fraction * U); the small offset keeps products like 0.1 * 30 from
    // rounding up past an exact integer.
    const double scaled = model.config().noise_fraction * static_cast<double>(usable_.size());
    cap_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(scaled - 1e-9)));
    cap_ = std::min(cap_, usable_.size());
    evidence_.resize(cap_);

    const std::size_t n = dataset.size();
    words_ = (n + 63) / 64;
    attribute_masks_.resize(dataset.attribute_count());
    for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
      if (is_missing(observation[a])) continue;
      Bits mask(words_, 0);
      for (std::size_t r = 0; r < n; ++r) {
        if (value_matches(observation[a], dataset.value(r, a), model.sigmas()[a], model.config().neighbor_window)) {
          mask[r / 64] |= std::uint64_t{1} << (r % 64);
        }
      }
      attribute_masks_[a] = std::move(mask);
    }
    class_masks_.assign(dataset.class_count(), Bits(words_, 0));
    for (std::size_t r = 0; r < n; ++r) {
      class_masks_[dataset.label_index(r)][r / 64] |= std::uint64_t{1} << (r % 64);
    }
  }

  TrialResult trial(std::size_t trial_index, Rng& rng) {
    const std::size_t drawn = 1 + static_cast<std::size_t>(rng.below(cap_));
    const std::size_t classes = model_.dataset().class_count();
    TrialResult result{trial_index, {}, {}, {}};
    result.chosen.reserve(drawn);
    for (std::size_t k = 0; k < drawn; ++k) result.chosen.push_back(evidence(k));
    result.forces = resultant_force(result.chosen, classes);
    // Unit moment of inertia: angular velocity equals the applied force.
    result.velocities = result.forces;
    return result;
  }

 private:
  const FactorEvidence& evidence(std::size_t k) {
    if (!evidence_[k]) {
      const auto& factor = model_.factor_table().scores[usable_[k]].factor;
      Bits joint = attribute_masks_[factor.attributes()[0]];
      for (std::size_t a : factor.attributes().subspan(1)) {
        const auto& mask = attribute_masks_[a];
        for (std::size_t w = 0; w < words_; ++w) joint[w] &= mask[w];
      }
      std::vector<std::size_t> counts(class_masks_.size(), 0);
      for (std::size_t j = 0; j < class_masks_.size(); ++j) {
        for (std::size_t w = 0; w < words_; ++w) counts[j] += std::popcount(joint[w] & class_masks_[j][w]);
      }
      evidence_[k] = evidence_from_counts(factor, counts, model_.priors());
    }
    return *evidence_[k];
  }

  const RandomWheelModel& model_;
  std::vector<std::size_t> usable_;
  std::size_t cap_ = 1;
  std::vector<std::optional<FactorEvidence>> evidence_;
  std::size_t words_ = 0;
  std::vector<Bits> attribute_masks_;
  std::vector<Bits> class_masks_;
};

}  // namespace

RandomWheelModel::RandomWheelModel(Dataset dataset, FactorTable factor_table, WheelConfig config)
    : dataset_(std::move(dataset)), factor_table_(std::move(factor_table)), config_(config) {
  config_.validate();
  priors_ = class_prior(dataset_);
  sigmas_ = compute_sigmas(dataset_);
  check_model_invariants(dataset_, factor_table_, priors_);
}

RandomWheelModel::RandomWheelModel(Dataset dataset, FactorTable factor_table, WheelConfig config,
                                   std::vector<double> priors, std::vector<std::optional<double>> sigmas)
    : RandomWheelModel(std::move(dataset), std::move(factor_table), config) {
  if (priors != priors_) throw ModelFormatError("stored priors do not match the training records");
  if (sigmas != sigmas_) throw ModelFormatError("stored sigmas do not match the training records");
}

RandomWheelModel train(const Dataset& dataset, const WheelConfig& config, std::size_t workers) {
  config.validate();
  if (config.depth > dataset.attribute_count()) {
    throw ConfigError("depth exceeds attribute count " + std::to_string(dataset.attribute_count()));
  }
  const auto priors = class_prior(dataset);
  for (std::size_t j = 0; j < priors.size(); ++j) {
    if (priors[j] == 0) throw DomainError("class " + dataset.class_tokens()[j] + " has no training records");
  }
  auto table = build_factor_table(dataset, config.depth, config.importance_shuffles, config.seed, workers);
  return RandomWheelModel(dataset, std::move(table), config);
}

Neighborhood extract_neighborhood(const RandomWheelModel& model, const Factor& factor,
                                  const Observation& observation) {
  const auto& dataset = model.dataset();
  Neighborhood out{factor, {}};
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const bool match = std::ranges::all_of(factor.attributes(), [&](std::size_t a) {
      return value_matches(observation[a], dataset.value(r, a), model.sigmas()[a], model.config().neighbor_window);
    });
    if (match) out.records.push_back(r);
  }
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& dataset, const Neighborhood& neighborhood) {
  std::vector<std::size_t> counts(dataset.class_count(), 0);
  for (std::size_t r : neighborhood.records) ++counts[dataset.label_index(r)];
  return counts;
}

double weightage(std::span<const std::size_t> counts) {
  double total = 0;
  double squares = 0;
  for (std::size_t c : counts) {
    total += static_cast<double>(c);
    squares += static_cast<double>(c) * static_cast<double>(c);
  }
  if (total == 0) throw DomainError("weightage of an empty neighborhood");
  const double concentration = squares / (total * total);
  if (counts.size() == 2) return std::clamp(2 * concentration - 1, 0.0, 1.0);
  const auto m = static_cast<double>(counts.size());
  return std::clamp(m / (m - 1) * (concentration - 1 / m), 0.0, 1.0);
}

double elementary_force(std::span<const std::size_t> counts, std::span<const double> priors, std::size_t j) {
  if (priors[j] <= 0) throw DomainError("class has zero prior");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw DomainError("elementary force of an empty neighborhood");
  const double local = static_cast<double>(counts[j]) / static_cast<double>(total);
  return local / priors[j];
}

std::vector<double> resultant_force(std::span<const FactorEvidence> chosen, std::size_t classes) {
  std::vector<double> forces(classes, 0.0);
  for (const auto& e : chosen) {
    if (!e.contributes()) continue;
    for (std::size_t j = 0; j < classes; ++j) forces[j] += e.weightage * e.forces[j];
  }
  return forces;
}

std::uint64_t observation_fingerprint(const Observation& observation) {
  std::string canonical;
  for (std::size_t i = 0; i < observation.size(); ++i) {
    if (i) canonical += ',';
    canonical += format_value(observation[i]);
  }
  return fnv1a(canonical);
}

Rng trial_stream(const RandomWheelModel& model, const Observation& observation, std::size_t trial_index) {
  return Rng(derive_seed({model.config().seed, observation_fingerprint(observation), trial_index}));
}

TrialResult run_trial(const RandomWheelModel& model, const Observation& observation, std::size_t trial_index,
                      Rng& rng) {
  model.dataset().check_observation(observation);
  TrialPlanner planner(model, observation);
  return planner.trial(trial_index, rng);
}

Verdict decide(std::span<const double> aggregate_velocity) {
  Verdict v;
  if (aggregate_velocity.empty()) return v;
  for (std::size_t j = 1; j < aggregate_velocity.size(); ++j) {
    if (aggregate_velocity[j] > aggregate_velocity[v.winner]) v.winner = j;
  }
  const double top = aggregate_velocity[v.winner];
  if (!(top > 0) || aggregate_velocity.size() < 2) return v;
  double runner_up = 0;
  bool first = true;
  for (std::size_t j = 0; j < aggregate_velocity.size(); ++j) {
    if (j == v.winner) continue;
    if (first || aggregate_velocity[j] > runner_up) runner_up = aggregate_velocity[j];
    first = false;
  }
  v.confidence = std::clamp((top - runner_up) / top, 0.0, 1.0);
  return v;
}

Recommendation recommend(const RandomWheelModel& model, const Observation& observation) {
  model.dataset().check_observation(observation);
  TrialPlanner planner(model, observation);
  const std::size_t classes = model.dataset().class_count();

  Recommendation rec;
  rec.trials.reserve(model.config().trials);
  std::vector<double> sum(classes, 0.0);
  for (std::size_t t = 0; t < model.config().trials; ++t) {
    Rng rng = trial_stream(model, observation, t);
    rec.trials.push_back(planner.trial(t, rng));
    for (std::size_t j = 0; j < classes; ++j) sum[j] += rec.trials.back().velocities[j];
  }
  rec.aggregate_velocity.resize(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    rec.aggregate_velocity[j] = sum[j] / static_cast<double>(model.config().trials);
  }
  const auto verdict = decide(rec.aggregate_velocity);
  rec.winner = verdict.winner;
  rec.confidence = verdict.confidence;
  rec.label = model.dataset().class_tokens()[rec.winner];
  return rec;
}

}  // namespace rwheel
