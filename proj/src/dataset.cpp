#include "rwheel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "rwheel/error.hpp"
#include "rwheel/random.hpp"

namespace rwheel {

namespace {

constexpr std::string_view kMissingMarker = "?";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

// Non-blank lines with their 1-based physical line numbers.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++number;
    if (!trim(raw).empty()) lines.push_back({number, raw});
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::integer: return "integer";
    case AttributeKind::real: return "real";
  }
  return "categorical";
}

std::optional<AttributeKind> parse_attribute_kind(std::string_view text) {
  if (text == "categorical") return AttributeKind::categorical;
  if (text == "integer") return AttributeKind::integer;
  if (text == "real") return AttributeKind::real;
  return std::nullopt;
}

double numeric_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw DomainError("value is not numeric");
}

bool matches_kind(const Value& v, AttributeKind kind) {
  switch (kind) {
    case AttributeKind::categorical: return is_missing(v) || std::holds_alternative<Categorical>(v);
    case AttributeKind::integer: return is_missing(v) || std::holds_alternative<std::int64_t>(v);
    case AttributeKind::real: return is_missing(v) || std::holds_alternative<double>(v);
  }
  return false;
}

std::string format_value(const Value& v) {
  if (is_missing(v)) return std::string(kMissingMarker);
  if (const auto* c = std::get_if<Categorical>(&v)) return c->token;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
  return std::string(buf, ptr);
}

Value parse_value(std::string_view field, AttributeKind kind) {
  field = trim(field);
  if (field == kMissingMarker) return Missing{};
  switch (kind) {
    case AttributeKind::categorical:
      if (field.empty()) throw ParseError("empty categorical token");
      return Categorical{std::string(field)};
    case AttributeKind::integer:
      if (auto v = parse_integer(field)) return *v;
      throw ParseError("non-integer token '" + std::string(field) + "' in integer column");
    case AttributeKind::real:
      if (auto v = parse_real(field)) return *v;
      throw ParseError("non-numeric token '" + std::string(field) + "' in real column");
  }
  throw ParseError("unknown attribute kind");
}

Dataset::Dataset(std::vector<AttributeSchema> schema, std::vector<std::string> class_tokens,
                 std::vector<Record> records)
    : schema_(std::move(schema)), class_tokens_(std::move(class_tokens)), records_(std::move(records)) {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].position != i) throw DomainError("attribute positions must be contiguous from 0");
  }
  if (class_tokens_.size() < 2) throw DomainError("a dataset needs at least 2 class tokens");
  for (std::size_t i = 0; i < class_tokens_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (class_tokens_[i] == class_tokens_[j]) throw DomainError("duplicate class token " + class_tokens_[i]);
    }
  }
  if (records_.empty()) throw DomainError("no records");

  labels_.reserve(records_.size());
  for (const auto& r : records_) {
    if (r.values.size() != schema_.size()) throw DomainError("record has wrong attribute count");
    for (std::size_t a = 0; a < schema_.size(); ++a) {
      if (!matches_kind(r.values[a], schema_[a].kind)) {
        throw DomainError("value kind does not match attribute " + schema_[a].name);
      }
    }
    const auto label = class_index(r.label);
    if (!label) throw DomainError("unknown class token " + r.label);
    labels_.push_back(*label);
  }

  ranks_.resize(schema_.size());
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    auto& ranks = ranks_[a];
    ranks.assign(records_.size(), kMissingRank);
    if (schema_[a].kind == AttributeKind::categorical) {
      std::vector<std::string_view> levels;
      for (const auto& r : records_) {
        if (const auto* c = std::get_if<Categorical>(&r.values[a])) levels.push_back(c->token);
      }
      std::ranges::sort(levels);
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      for (std::size_t i = 0; i < records_.size(); ++i) {
        if (const auto* c = std::get_if<Categorical>(&records_[i].values[a])) {
          ranks[i] = static_cast<std::int32_t>(std::ranges::lower_bound(levels, c->token) - levels.begin());
        }
      }
    } else {
      std::vector<double> levels;
      for (const auto& r : records_) {
        if (!is_missing(r.values[a])) levels.push_back(numeric_value(r.values[a]));
      }
      std::ranges::sort(levels);
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!is_missing(records_[i].values[a])) {
          const double v = numeric_value(records_[i].values[a]);
          ranks[i] = static_cast<std::int32_t>(std::ranges::lower_bound(levels, v) - levels.begin());
        }
      }
    }
  }
}

std::optional<std::size_t> Dataset::class_index(std::string_view token) const {
  const auto it = std::ranges::find(class_tokens_, token);
  if (it == class_tokens_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - class_tokens_.begin());
}

std::optional<std::size_t> Dataset::attribute_index(std::string_view name) const {
  const auto it = std::ranges::find(schema_, name, &AttributeSchema::name);
  if (it == schema_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - schema_.begin());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Record> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(records_.at(i));
  return Dataset(schema_, class_tokens_, std::move(picked));
}

Dataset Dataset::with_permuted_labels(std::uint64_t seed) const {
  std::vector<std::string> labels;
  labels.reserve(records_.size());
  for (const auto& r : records_) labels.push_back(r.label);
  Rng rng(seed);
  rng.shuffle(std::span(labels));
  auto records = records_;
  for (std::size_t i = 0; i < records.size(); ++i) records[i].label = std::move(labels[i]);
  return Dataset(schema_, class_tokens_, std::move(records));
}

void Dataset::check_observation(const Observation& observation) const {
  if (observation.size() != schema_.size()) {
    throw SchemaError("observation has " + std::to_string(observation.size()) + " values, expected " +
                      std::to_string(schema_.size()));
  }
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    if (!matches_kind(observation[a], schema_[a].kind)) {
      throw SchemaError("attribute " + schema_[a].name + " expects a " + std::string(to_string(schema_[a].kind)) +
                            " value",
                        schema_[a].name);
    }
  }
}

SchemaFile parse_schema(std::string_view text) {
  SchemaFile out;
  std::optional<std::size_t> class_column;
  std::size_t column = 0;
  for (const auto& line : content_lines(text)) {
    const auto body = trim(line.text);
    if (body.front() == '#') continue;
    const auto fields = split_fields(body);
    if (fields.size() < 2 || fields[0].empty()) throw ParseError("expected 'name,kind'", line.number);
    if (fields[1] == "class") {
      if (class_column) throw ParseError("more than one class column", line.number);
      class_column = column;
      for (std::size_t i = 2; i < fields.size(); ++i) out.class_tokens.emplace_back(fields[i]);
    } else {
      const auto kind = parse_attribute_kind(fields[1]);
      if (!kind) throw ParseError("unknown attribute kind '" + std::string(fields[1]) + "'", line.number);
      if (fields.size() != 2) throw ParseError("expected 'name,kind'", line.number);
      out.attributes.push_back({std::string(fields[0]), *kind, out.attributes.size()});
    }
    ++column;
  }
  if (out.attributes.empty()) throw ParseError("schema declares no attributes");
  // Without a class line the label follows the last attribute.
  out.class_column = class_column.value_or(column);
  return out;
}

std::string format_schema(const SchemaFile& schema) {
  std::string out;
  const std::size_t columns = schema.attributes.size() + 1;
  std::size_t attr = 0;
  for (std::size_t c = 0; c < columns; ++c) {
    if (c == schema.class_column) {
      out += "class,class";
      for (const auto& t : schema.class_tokens) out += "," + t;
    } else {
      const auto& a = schema.attributes[attr++];
      out += a.name + "," + std::string(to_string(a.kind));
    }
    out += '\n';
  }
  return out;
}

SchemaFile infer_schema(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("no records");
  const std::size_t columns = split_fields(lines.front().text).size();
  if (columns < 2) throw ParseError("need at least one attribute and a class column", lines.front().number);

  std::vector<bool> all_integer(columns, true);
  std::vector<bool> all_real(columns, true);
  std::vector<bool> any_value(columns, false);
  for (const auto& line : lines) {
    const auto fields = split_fields(line.text);
    if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()),
                       line.number);
    }
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      if (fields[c] == kMissingMarker) continue;
      any_value[c] = true;
      if (!parse_integer(fields[c])) all_integer[c] = false;
      if (!parse_real(fields[c])) all_real[c] = false;
    }
  }

  SchemaFile out;
  const int width = columns >= 100 ? 3 : 2;
  auto name = [width](std::size_t i) {
    std::string n = std::to_string(i + 1);
    return "A" + std::string(width - std::min<std::size_t>(width, n.size()), '0') + n;
  };
  for (std::size_t c = 0; c + 1 < columns; ++c) {
    AttributeKind kind = AttributeKind::categorical;
    if (any_value[c] && all_integer[c]) {
      kind = AttributeKind::integer;
    } else if (any_value[c] && all_real[c]) {
      kind = AttributeKind::real;
    }
    out.attributes.push_back({name(c), kind, c});
  }
  out.class_column = columns - 1;
  return out;
}

Dataset parse_dataset(std::string_view text, std::span<const AttributeSchema> schema, std::size_t class_column,
                      std::vector<std::string> class_tokens) {
  const std::size_t columns = schema.size() + 1;
  if (class_column >= columns) throw ParseError("class column out of range");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].position != i) throw ParseError("schema positions must be contiguous from 0");
  }
  const bool declared = !class_tokens.empty();

  std::vector<Record> records;
  for (const auto& line : content_lines(text)) {
    const auto fields = split_fields(line.text);
    if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()),
                       line.number);
    }
    Record record;
    record.values.reserve(schema.size());
    std::size_t attr = 0;
    for (std::size_t c = 0; c < columns; ++c) {
      if (c == class_column) {
        record.label = std::string(fields[c]);
        continue;
      }
      try {
        record.values.push_back(parse_value(fields[c], schema[attr].kind));
      } catch (const ParseError& e) {
        throw ParseError(schema[attr].name + ": " + e.what(), line.number);
      }
      ++attr;
    }
    if (std::ranges::find(class_tokens, record.label) == class_tokens.end()) {
      if (declared || record.label.empty() || record.label == kMissingMarker) {
        throw ParseError("unknown class token '" + record.label + "'", line.number);
      }
      class_tokens.push_back(record.label);
    }
    records.push_back(std::move(record));
  }
  if (records.empty()) throw ParseError("no records");
  if (class_tokens.size() < 2) throw ParseError("need at least 2 class tokens, found " + std::to_string(class_tokens.size()));
  return Dataset({schema.begin(), schema.end()}, std::move(class_tokens), std::move(records));
}

Dataset parse_dataset(std::string_view text, const SchemaFile& schema) {
  return parse_dataset(text, schema.attributes, schema.class_column, schema.class_tokens);
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& r : dataset.records()) {
    for (const auto& v : r.values) {
      out += format_value(v);
      out += ',';
    }
    out += r.label;
    out += '\n';
  }
  return out;
}

std::vector<double> class_prior(const Dataset& dataset) {
  std::vector<std::size_t> counts(dataset.class_count(), 0);
  for (std::size_t label : dataset.label_indices()) ++counts[label];
  std::vector<double> prior(counts.size());
  const auto total = static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < counts.size(); ++j) prior[j] = static_cast<double>(counts[j]) / total;
  return prior;
}

double attribute_stddev(const Dataset& dataset, std::size_t attribute) {
  if (attribute >= dataset.attribute_count()) throw DomainError("attribute out of range");
  const auto& schema = dataset.schema()[attribute];
  if (schema.kind == AttributeKind::categorical) {
    throw DomainError("standard deviation of categorical attribute " + schema.name);
  }
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : dataset.records()) {
    if (is_missing(r.values[attribute])) continue;
    sum += numeric_value(r.values[attribute]);
    ++n;
  }
  if (n == 0) throw DomainError("attribute " + schema.name + " has no non-missing values");
  const double mean = sum / static_cast<double>(n);
  double squares = 0;
  for (const auto& r : dataset.records()) {
    if (is_missing(r.values[attribute])) continue;
    const double d = numeric_value(r.values[attribute]) - mean;
    squares += d * d;
  }
  return std::sqrt(squares / static_cast<double>(n));
}

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_folds(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DomainError("k-fold split needs k >= 2");
  if (k > dataset.size()) throw DomainError("k exceeds record count");
  FoldAssignment out{k, std::vector<std::size_t>(dataset.size(), 0)};
  Rng rng(seed);
  std::size_t dealt = 0;
  for (std::size_t c = 0; c < dataset.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.label_index(i) == c) members.push_back(i);
    }
    rng.shuffle(std::span(members));
    for (std::size_t i : members) out.fold_of[i] = dealt++ % k;
  }
  return out;
}

void throw_empty_label_sequence() { throw DomainError("cannot count bins of an empty label sequence"); }

}  // namespace rwheel
