#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rwheel {

enum class AttributeKind { categorical, integer, real };

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> parse_attribute_kind(std::string_view text);

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  std::size_t position = 0;

  bool operator==(const AttributeSchema&) const = default;
};

struct Missing {
  bool operator==(const Missing&) const = default;
};

struct Categorical {
  std::string token;
  bool operator==(const Categorical&) const = default;
};

/// One cell: Missing, a categorical token, a whole number or a finite real.
using Value = std::variant<Missing, Categorical, std::int64_t, double>;

inline bool is_missing(const Value& v) { return std::holds_alternative<Missing>(v); }

/// Numeric payload of an Integer or Real value.
double numeric_value(const Value& v);

/// True when v is Missing or its tag matches `kind`.
bool matches_kind(const Value& v, AttributeKind kind);

/// Text form used in files: `?` for Missing, shortest round-trip decimal for reals.
std::string format_value(const Value& v);

/// Parses one field for a column of the given kind. `?` yields Missing.
/// Throws ParseError on non-numeric text in a numeric column or non-finite reals.
Value parse_value(std::string_view field, AttributeKind kind);

/// A record without its label.
using Observation = std::vector<Value>;

struct Record {
  Observation values;
  std::string label;

  bool operator==(const Record&) const = default;
};

/// Sort rank for Missing cells in Dataset::ranks.
inline constexpr std::int32_t kMissingRank = -1;

/// Immutable, schema-typed set of labelled records.
///
/// Beyond the records themselves the dataset precomputes two lookup tables
/// used by the hot loops of factor scoring and neighborhood extraction: each
/// record's class index, and a dense per-attribute sort rank (categorical
/// tokens ranked lexicographically, numbers ascending, equal values sharing a
/// rank).
class Dataset {
 public:
  Dataset(std::vector<AttributeSchema> schema, std::vector<std::string> class_tokens,
          std::vector<Record> records);

  const std::vector<AttributeSchema>& schema() const { return schema_; }
  const std::vector<Record>& records() const { return records_; }
  const std::vector<std::string>& class_tokens() const { return class_tokens_; }

  std::size_t size() const { return records_.size(); }
  std::size_t attribute_count() const { return schema_.size(); }
  std::size_t class_count() const { return class_tokens_.size(); }

  const Record& record(std::size_t i) const { return records_[i]; }
  const Value& value(std::size_t record, std::size_t attribute) const {
    return records_[record].values[attribute];
  }

  std::size_t label_index(std::size_t record) const { return labels_[record]; }
  std::span<const std::size_t> label_indices() const { return labels_; }

  std::optional<std::size_t> class_index(std::string_view token) const;
  std::optional<std::size_t> attribute_index(std::string_view name) const;

  std::span<const std::int32_t> ranks(std::size_t attribute) const { return ranks_[attribute]; }

  /// Records at the given indices, in that order; schema and class tokens kept.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Same records with labels randomly permuted among them.
  Dataset with_permuted_labels(std::uint64_t seed) const;

  /// Throws SchemaError unless `observation` has one value per attribute with
  /// kinds matching the schema (Missing allowed anywhere).
  void check_observation(const Observation& observation) const;

 private:
  std::vector<AttributeSchema> schema_;
  std::vector<std::string> class_tokens_;
  std::vector<Record> records_;
  std::vector<std::size_t> labels_;
  std::vector<std::vector<std::int32_t>> ranks_;
};

/// Parsed schema sidecar: attribute list, class column and optional declared
/// class tokens.
///
/// The sidecar is plain text with one `name,kind` line per file column, where
/// kind is `categorical`, `integer`, `real` or `class`. The class line may
/// list the admissible tokens: `A16,class,+,-`. Blank lines and lines starting
/// with `#` are ignored.
struct SchemaFile {
  std::vector<AttributeSchema> attributes;
  std::size_t class_column = 0;
  std::vector<std::string> class_tokens;
};

SchemaFile parse_schema(std::string_view text);
std::string format_schema(const SchemaFile& schema);

/// Schema guessed from the data: the last column is the class, a column whose
/// non-missing fields all parse as whole numbers is integer, all-numeric is
/// real, anything else categorical. Attributes are named A01, A02, ...
SchemaFile infer_schema(std::string_view text);

/// Parses comma-separated records. `schema` describes the non-class columns in
/// file order (positions 0..n-1); `class_column` is the label's file column.
/// When `class_tokens` is empty the tokens are taken from the data in order of
/// first appearance; otherwise any other label is a parse error.
Dataset parse_dataset(std::string_view text, std::span<const AttributeSchema> schema,
                      std::size_t class_column, std::vector<std::string> class_tokens = {});

Dataset parse_dataset(std::string_view text, const SchemaFile& schema);

/// Writes records as comma-separated lines with the label in the last column.
std::string serialize_dataset(const Dataset& dataset);

/// Relative class frequencies, indexed like dataset.class_tokens().
std::vector<double> class_prior(const Dataset& dataset);

/// Population standard deviation over the non-missing values of a numeric
/// attribute. Throws DomainError for categorical attributes or when every
/// value is missing.
double attribute_stddev(const Dataset& dataset, std::size_t attribute);

/// Fold index per record.
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Stratified k-fold split: each class's records are shuffled and dealt
/// round-robin, continuing the deal across classes so fold sizes differ by at
/// most one.
FoldAssignment stratified_folds(const Dataset& dataset, std::size_t k, std::uint64_t seed);

[[noreturn]] void throw_empty_label_sequence();

/// Number of maximal runs of equal labels: 1 + adjacent unequal pairs.
/// Throws DomainError when the sequence is empty.
template <class T>
std::size_t count_bins(std::span<const T> labels) {
  if (labels.empty()) throw_empty_label_sequence();
  std::size_t bins = 1;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (!(labels[i] == labels[i - 1])) ++bins;
  }
  return bins;
}

template <std::ranges::contiguous_range R>
std::size_t count_bins(const R& labels) {
  return count_bins(std::span<const std::ranges::range_value_t<R>>(labels));
}

}  // namespace rwheel
