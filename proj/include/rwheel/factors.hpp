#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwheel/dataset.hpp"

namespace rwheel {

/// A non-empty set of attribute positions, stored ascending.
class Factor {
 public:
  Factor() = default;
  /// Throws DomainError on an empty list or duplicate positions.
  explicit Factor(std::vector<std::size_t> attributes);

  std::span<const std::size_t> attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  bool contains(std::size_t attribute) const;

  /// Attribute names joined with '+', e.g. "A09+A11".
  std::string label(std::span<const AttributeSchema> schema) const;

  bool operator==(const Factor&) const = default;

  /// Smaller factors first, then lexicographic positions.
  std::strong_ordering operator<=>(const Factor& other) const;

 private:
  std::vector<std::size_t> attributes_;
};

struct FactorScore {
  Factor factor;
  double default_ratio = 0;  // expected bins / n under random order
  double factor_ratio = 0;   // expected bins / n after sorting by the factor
  double importance = 0;     // default_ratio - factor_ratio
};

/// Informative factors, most important first.
struct FactorTable {
  std::vector<FactorScore> scores;
  std::size_t discarded_count = 0;
};

/// Every attribute subset of size 1..depth, ordered by size then positions.
/// Throws DomainError unless 1 <= depth <= attribute_count.
std::vector<Factor> enumerate_factors(std::size_t attribute_count, std::size_t depth);
std::vector<Factor> enumerate_factors(std::span<const AttributeSchema> schema, std::size_t depth);

/// Stream seeds used by build_factor_table, exposed so single-factor calls can
/// reproduce table entries.
std::uint64_t default_ratio_seed(std::uint64_t seed);
std::uint64_t factor_seed(std::uint64_t seed, const Factor& factor);

/// Mean bins per record of the label sequence over `shuffles` uniform shuffles
/// of the whole dataset.
double default_bin_ratio(const Dataset& dataset, std::size_t shuffles, std::uint64_t seed);

/// Mean bins per record after sorting by the factor.
///
/// Records with a Missing value in any factor attribute are dropped first.
/// For each ordering of the factor's attributes the filtered records are
/// repeatedly shuffled and then stably sorted on that attribute ordering, and
/// the resulting label sequence's bins are counted. `shuffles` is the total
/// budget per factor, split as ceil(shuffles / size!) per ordering. The mean
/// bin count is divided by the filtered record count.
///
/// Returns nullopt when filtering leaves no records (factor unusable).
std::optional<double> factor_bin_ratio(const Dataset& dataset, const Factor& factor, std::size_t shuffles,
                                       std::uint64_t seed);

/// importance = default_bin_ratio - factor_bin_ratio, with the stream seeds
/// derived from `seed` exactly as build_factor_table does.
std::optional<FactorScore> score_factor(const Dataset& dataset, const Factor& factor, std::size_t shuffles,
                                        std::uint64_t seed);

/// Scores every factor up to `depth`, keeps those with importance > 0 and
/// ranks them (importance descending, then smaller factor, then positions).
/// Throws DomainError("no informative factors") when nothing survives.
FactorTable build_factor_table(const Dataset& dataset, std::size_t depth, std::size_t shuffles,
                               std::uint64_t seed, std::size_t workers = 1);

}  // namespace rwheel
