#include "rwheel/factors.hpp"

#include <algorithm>
#include <numeric>

#include "rwheel/error.hpp"
#include "rwheel/parallel.hpp"
#include "rwheel/random.hpp"

namespace rwheel {

namespace {

constexpr std::uint64_t kDefaultRatioTag = 0x64656661756c74ULL;  // "default"

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// Collapses a lexicographic multi-attribute key into one dense integer per
// record: equal keys share a code and codes follow key order.
std::vector<std::uint32_t> composite_keys(const Dataset& dataset, std::span<const std::size_t> records,
                                          std::span<const std::size_t> ordering, std::uint32_t& key_count) {
  const auto first = dataset.ranks(ordering[0]);
  std::vector<std::uint32_t> keys(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) keys[i] = static_cast<std::uint32_t>(first[records[i]]);
  key_count = static_cast<std::uint32_t>(*std::ranges::max_element(keys) + 1);

  std::vector<std::uint64_t> pairs(records.size());
  for (std::size_t level = 1; level < ordering.size(); ++level) {
    const auto next = dataset.ranks(ordering[level]);
    for (std::size_t i = 0; i < records.size(); ++i) {
      pairs[i] = (static_cast<std::uint64_t>(keys[i]) << 32) | static_cast<std::uint32_t>(next[records[i]]);
    }
    auto distinct = pairs;
    std::ranges::sort(distinct);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t i = 0; i < records.size(); ++i) {
      keys[i] = static_cast<std::uint32_t>(std::ranges::lower_bound(distinct, pairs[i]) - distinct.begin());
    }
    key_count = static_cast<std::uint32_t>(distinct.size());
  }
  return keys;
}

}  // namespace

Factor::Factor(std::vector<std::size_t> attributes) : attributes_(std::move(attributes)) {
  if (attributes_.empty()) throw DomainError("a factor needs at least one attribute");
  std::ranges::sort(attributes_);
  if (std::adjacent_find(attributes_.begin(), attributes_.end()) != attributes_.end()) {
    throw DomainError("duplicate attribute in factor");
  }
}

bool Factor::contains(std::size_t attribute) const {
  return std::ranges::binary_search(attributes_, attribute);
}

std::string Factor::label(std::span<const AttributeSchema> schema) const {
  std::string out;
  for (std::size_t a : attributes_) {
    if (!out.empty()) out += '+';
    out += a < schema.size() ? schema[a].name : std::to_string(a);
  }
  return out;
}

std::strong_ordering Factor::operator<=>(const Factor& other) const {
  if (auto c = attributes_.size() <=> other.attributes_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(attributes_.begin(), attributes_.end(),
                                                other.attributes_.begin(), other.attributes_.end());
}

std::vector<Factor> enumerate_factors(std::size_t attribute_count, std::size_t depth) {
  if (depth < 1 || depth > attribute_count) {
    throw DomainError("factor depth must be in [1, " + std::to_string(attribute_count) + "]");
  }
  std::vector<Factor> out;
  for (std::size_t size = 1; size <= depth; ++size) {
    // Lexicographic walk over size-element combinations.
    std::vector<std::size_t> pick(size);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      out.emplace_back(pick);
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == attribute_count - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

std::vector<Factor> enumerate_factors(std::span<const AttributeSchema> schema, std::size_t depth) {
  return enumerate_factors(schema.size(), depth);
}

std::uint64_t default_ratio_seed(std::uint64_t seed) { return derive_seed({seed, kDefaultRatioTag}); }

std::uint64_t factor_seed(std::uint64_t seed, const Factor& factor) {
  std::uint64_t h = derive_seed({seed, factor.size()});
  for (std::size_t a : factor.attributes()) h = derive_seed({h, a});
  return h;
}

double default_bin_ratio(const Dataset& dataset, std::size_t shuffles, std::uint64_t seed) {
  if (shuffles < 1) throw DomainError("default bin ratio needs at least one shuffle");
  std::vector<std::size_t> labels(dataset.label_indices().begin(), dataset.label_indices().end());
  Rng rng(seed);
  std::uint64_t total_bins = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    rng.shuffle(std::span(labels));
    total_bins += count_bins(std::span<const std::size_t>(labels));
  }
  const double mean_bins = static_cast<double>(total_bins) / static_cast<double>(shuffles);
  return mean_bins / static_cast<double>(dataset.size());
}

std::optional<double> factor_bin_ratio(const Dataset& dataset, const Factor& factor, std::size_t shuffles,
                                       std::uint64_t seed) {
  if (shuffles < 1) throw DomainError("factor bin ratio needs at least one shuffle");
  for (std::size_t a : factor.attributes()) {
    if (a >= dataset.attribute_count()) throw DomainError("factor attribute out of range");
  }

  std::vector<std::size_t> filtered;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const bool complete = std::ranges::none_of(factor.attributes(), [&](std::size_t a) {
      return dataset.ranks(a)[i] == kMissingRank;
    });
    if (complete) filtered.push_back(i);
  }
  if (filtered.empty()) return std::nullopt;

  const std::size_t n = filtered.size();
  const std::size_t per_ordering = (shuffles + factorial(factor.size()) - 1) / factorial(factor.size());

  Rng rng(seed);
  std::vector<std::size_t> ordering(factor.attributes().begin(), factor.attributes().end());
  std::vector<std::uint32_t> order(n);       // positions into `filtered`
  std::vector<std::size_t> sorted_labels(n);
  std::vector<std::uint32_t> bucket_start;
  std::uint64_t total_bins = 0;
  std::size_t runs = 0;
  do {
    std::uint32_t key_count = 0;
    const auto keys = composite_keys(dataset, filtered, ordering, key_count);
    for (std::size_t rep = 0; rep < per_ordering; ++rep) {
      std::iota(order.begin(), order.end(), 0u);
      rng.shuffle(std::span(order));
      // Stable counting sort of the shuffled sequence by composite key.
      bucket_start.assign(key_count + 1, 0);
      for (std::uint32_t p : order) ++bucket_start[keys[p] + 1];
      std::partial_sum(bucket_start.begin(), bucket_start.end(), bucket_start.begin());
      for (std::uint32_t p : order) sorted_labels[bucket_start[keys[p]]++] = dataset.label_index(filtered[p]);
      total_bins += count_bins(std::span<const std::size_t>(sorted_labels));
      ++runs;
    }
  } while (std::next_permutation(ordering.begin(), ordering.end()));

  const double mean_bins = static_cast<double>(total_bins) / static_cast<double>(runs);
  return mean_bins / static_cast<double>(n);
}

namespace {

std::optional<FactorScore> score_with_default(const Dataset& dataset, const Factor& factor, std::size_t shuffles,
                                              std::uint64_t seed, double default_ratio) {
  const auto ratio = factor_bin_ratio(dataset, factor, shuffles, factor_seed(seed, factor));
  if (!ratio) return std::nullopt;
  return FactorScore{factor, default_ratio, *ratio, default_ratio - *ratio};
}

}  // namespace

std::optional<FactorScore> score_factor(const Dataset& dataset, const Factor& factor, std::size_t shuffles,
                                        std::uint64_t seed) {
  const double a = default_bin_ratio(dataset, shuffles, default_ratio_seed(seed));
  return score_with_default(dataset, factor, shuffles, seed, a);
}

FactorTable build_factor_table(const Dataset& dataset, std::size_t depth, std::size_t shuffles,
                               std::uint64_t seed, std::size_t workers) {
  const auto factors = enumerate_factors(dataset.attribute_count(), depth);
  const double a = default_bin_ratio(dataset, shuffles, default_ratio_seed(seed));

  std::vector<std::optional<FactorScore>> scored(factors.size());
  parallel_for(factors.size(), workers,
               [&](std::size_t i) { scored[i] = score_with_default(dataset, factors[i], shuffles, seed, a); });

  FactorTable table;
  for (auto& s : scored) {
    if (s && s->importance > 0) {
      table.scores.push_back(std::move(*s));
    } else {
      ++table.discarded_count;
    }
  }
  if (table.scores.empty()) throw DomainError("no informative factors");
  std::ranges::sort(table.scores, [](const FactorScore& x, const FactorScore& y) {
    if (x.importance != y.importance) return x.importance > y.importance;
    return x.factor < y.factor;
  });
  return table;
}

}  // namespace rwheel
