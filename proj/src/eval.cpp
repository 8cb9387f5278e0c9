#include "rwheel/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "rwheel/error.hpp"
#include "rwheel/explain.hpp"
#include "rwheel/parallel.hpp"

namespace rwheel {

const std::array<ReferenceScore, 11> kReferenceScores{{
    {"Naive Bayes", "NB", 0.7770, 0.7930, 0.7690, 0.5340},
    {"Bayesian network", "BN", 0.8620, 0.8640, 0.8610, 0.7186},
    {"Logistic regression", "LR", 0.8520, 0.8540, 0.8530, 0.7024},
    {"Decision tree", "DT", 0.8610, 0.8610, 0.8610, 0.7180},
    {"Support vector machine", "SVM", 0.8490, 0.8610, 0.8500, 0.7003},
    {"K-nearest neighbour", "kNN", 0.8120, 0.8110, 0.8110, 0.6178},
    {"Artificial neural network", "ANN", 0.8290, 0.8290, 0.8290, 0.6529},
    {"Random forest", "RF", 0.8670, 0.8670, 0.8670, 0.7295},
    {"Deep learning", "DL", 0.8160, 0.8160, 0.8160, 0.6268},
    {"Boosting method", "BM", 0.8460, 0.8470, 0.8460, 0.6894},
    {"Random wheel (published)", "RW", 0.8681, 0.8763, 0.8685, 0.7368},
}};

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::size_t count) {
  if (actual >= classes_ || predicted >= classes_) throw DomainError("class index out of range");
  counts_[actual * classes_ + predicted] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw DomainError("confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (std::size_t c : counts_) t += c;
  return t;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t m = cm.classes();
  const auto total = static_cast<double>(cm.total());
  if (cm.total() == 0) throw DomainError("cannot compute metrics of an empty confusion matrix");

  std::vector<double> actual(m, 0), predicted(m, 0);
  double diagonal = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t p = 0; p < m; ++p) {
      const auto c = static_cast<double>(cm.count(a, p));
      actual[a] += c;
      predicted[p] += c;
      if (a == p) diagonal += c;
    }
  }

  MetricsReport r;
  r.accuracy = diagonal / total;
  double chance = 0;
  for (std::size_t c = 0; c < m; ++c) {
    const auto tp = static_cast<double>(cm.count(c, c));
    double precision = 0;
    if (predicted[c] > 0) {
      precision = tp / predicted[c];
    } else {
      r.classes_without_predictions.push_back(c);
    }
    const double recall = actual[c] > 0 ? tp / actual[c] : 0;
    const double f = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0;
    const double weight = actual[c] / total;
    r.precision += weight * precision;
    r.f_measure += weight * f;
    chance += (actual[c] / total) * (predicted[c] / total);
  }
  r.kappa = chance >= 1 ? 0 : (r.accuracy - chance) / (1 - chance);
  return r;
}

ConfidenceSplit confidence_split(std::span<const InstanceOutcome> ledger) {
  if (ledger.empty()) throw DomainError("confidence split of an empty ledger");
  ConfidenceSplit split;
  double correct_sum = 0, incorrect_sum = 0;
  for (const auto& o : ledger) {
    if (!o.predicted) continue;
    split.ranked.push_back({o.confidence, o.correct});
    if (o.correct) {
      correct_sum += o.confidence;
      ++split.correct_count;
    } else {
      incorrect_sum += o.confidence;
      ++split.incorrect_count;
    }
  }
  if (split.correct_count) split.correct_mean = correct_sum / static_cast<double>(split.correct_count);
  if (split.incorrect_count) split.incorrect_mean = incorrect_sum / static_cast<double>(split.incorrect_count);
  std::ranges::stable_sort(split.ranked, [](const RankedConfidence& x, const RankedConfidence& y) {
    return x.confidence > y.confidence;
  });
  return split;
}

CrossValidationResult cross_validate(const Dataset& dataset, const WheelConfig& config, std::size_t k,
                                     std::uint64_t seed, std::size_t workers) {
  config.validate();
  const auto folds = stratified_folds(dataset, k, seed);

  std::vector<std::vector<InstanceOutcome>> per_fold(k);
  parallel_for(k, workers, [&](std::size_t f) {
    const auto train_idx = folds.train_indices(f);
    const auto test_idx = folds.test_indices(f);
    WheelConfig fold_config = config;
    fold_config.seed = config.seed + f;
    const auto model = train(dataset.subset(train_idx), fold_config, 1);

    auto& outcomes = per_fold[f];
    for (std::size_t i : test_idx) {
      InstanceOutcome o;
      o.record = i;
      o.fold = f;
      o.actual = dataset.label_index(i);
      try {
        const auto rec = recommend(model, dataset.record(i).values);
        const auto report = aggregate_explanation(rec, dataset.schema());
        o.predicted = rec.winner;
        o.confidence = rec.confidence;
        o.correct = rec.winner == o.actual;
        o.has_explanation = report.has_signal;
        o.attribution.assign(dataset.attribute_count(), 0.0);
        for (const auto& e : report.entries) o.attribution[e.position] = e.percentage;
      } catch (const UnclassifiableError&) {
        o.predicted.reset();
      }
      outcomes.push_back(std::move(o));
    }
  });

  CrossValidationResult result;
  result.confusion = ConfusionMatrix(dataset.class_count());
  for (auto& fold : per_fold) {
    for (auto& o : fold) {
      if (o.predicted) {
        result.confusion.add(o.actual, *o.predicted);
      } else {
        ++result.unclassifiable;
      }
      result.instances.push_back(std::move(o));
    }
  }
  std::ranges::sort(result.instances, {}, &InstanceOutcome::record);
  if (result.confusion.total() == 0) throw DomainError("every test instance was unclassifiable");
  result.metrics = compute_metrics(result.confusion);
  result.confidence = confidence_split(result.instances);
  return result;
}

void write_confidence_csvs(const ConfidenceSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream correct(dir / "correct.csv", std::ios::trunc);
  std::ofstream wrong(dir / "wrong.csv", std::ios::trunc);
  if (!correct || !wrong) throw std::runtime_error("cannot write confidence files in " + dir.string());
  char buf[32];
  for (const auto& r : split.ranked) {
    std::snprintf(buf, sizeof buf, "%.9f\n", r.confidence);
    (r.correct ? correct : wrong) << buf;
  }
}

std::string format_metrics_table(const CrossValidationResult& result, std::span<const std::string> class_tokens) {
  std::string out;
  char buf[160];
  const auto& m = result.metrics;
  std::snprintf(buf, sizeof buf, "%-10s %-10s %-10s %-10s\n", "Accuracy", "Precision", "F-measure", "Kappa");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10.4f %-10.4f %-10.4f %-10.4f\n", m.accuracy, m.precision, m.f_measure, m.kappa);
  out += buf;

  out += "\nConfusion (rows actual, columns predicted):\n      ";
  for (const auto& t : class_tokens) {
    std::snprintf(buf, sizeof buf, "%8s", t.c_str());
    out += buf;
  }
  out += '\n';
  for (std::size_t a = 0; a < result.confusion.classes(); ++a) {
    std::snprintf(buf, sizeof buf, "%6s", class_tokens[a].c_str());
    out += buf;
    for (std::size_t p = 0; p < result.confusion.classes(); ++p) {
      std::snprintf(buf, sizeof buf, "%8zu", result.confusion.count(a, p));
      out += buf;
    }
    out += '\n';
  }
  if (result.unclassifiable) {
    std::snprintf(buf, sizeof buf, "Unclassifiable instances (excluded): %zu\n", result.unclassifiable);
    out += buf;
  }
  for (std::size_t c : m.classes_without_predictions) {
    out += "Warning: class " + class_tokens[c] + " was never predicted; its precision counts as 0\n";
  }

  const auto& cs = result.confidence;
  out += "\nMean confidence: correct ";
  if (cs.correct_mean) {
    std::snprintf(buf, sizeof buf, "%.2f%% (n=%zu)", 100 * *cs.correct_mean, cs.correct_count);
    out += buf;
  } else {
    out += "n/a";
  }
  out += ", incorrect ";
  if (cs.incorrect_mean) {
    std::snprintf(buf, sizeof buf, "%.2f%% (n=%zu)", 100 * *cs.incorrect_mean, cs.incorrect_count);
    out += buf;
  } else {
    out += "n/a";
  }
  out += "\n\nReference scores on the credit-approval data (published, 10-fold CV):\n";
  for (const auto& ref : kReferenceScores) {
    std::snprintf(buf, sizeof buf, "  %-4s %-26s %.4f %.4f %.4f %.4f\n", std::string(ref.code).c_str(),
                  std::string(ref.classifier).c_str(), ref.accuracy, ref.precision, ref.f_measure, ref.kappa);
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const MetricsReport& metrics) {
  return {{"accuracy", metrics.accuracy},
          {"precision", metrics.precision},
          {"f_measure", metrics.f_measure},
          {"kappa", metrics.kappa},
          {"classes_without_predictions", metrics.classes_without_predictions}};
}

nlohmann::json to_json(const CrossValidationResult& result, std::span<const std::string> class_tokens) {
  nlohmann::json confusion = nlohmann::json::array();
  for (std::size_t a = 0; a < result.confusion.classes(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < result.confusion.classes(); ++p) row.push_back(result.confusion.count(a, p));
    confusion.push_back(std::move(row));
  }
  const auto& cs = result.confidence;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"metrics", to_json(result.metrics)},
          {"class_tokens", std::vector<std::string>(class_tokens.begin(), class_tokens.end())},
          {"confusion", std::move(confusion)},
          {"unclassifiable", result.unclassifiable},
          {"confidence",
           {{"correct_mean", opt(cs.correct_mean)},
            {"incorrect_mean", opt(cs.incorrect_mean)},
            {"correct_count", cs.correct_count},
            {"incorrect_count", cs.incorrect_count}}}};
}

}  // namespace rwheel
