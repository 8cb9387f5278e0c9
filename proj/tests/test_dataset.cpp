#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "rwheel/dataset.hpp"
#include "rwheel/error.hpp"
#include "rwheel/random.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rwheel;
using rwheel::testing::kCreditSchema;

namespace {

Dataset labels_only(const std::vector<std::string>& labels) {
  std::vector<Record> records;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    records.push_back({{static_cast<std::int64_t>(i)}, labels[i]});
  }
  return Dataset({{"x", AttributeKind::integer, 0}}, {"+", "-"}, std::move(records));
}

}  // namespace

TEST_CASE("count_bins") {
  const std::vector<std::string> worked{"+", "+", "-", "-", "-", "+", "-", "+", "-", "-"};
  CHECK(count_bins(worked) == 6);
  CHECK(count_bins(std::vector<std::string>{"+", "+", "+"}) == 1);
  CHECK(count_bins(std::vector<std::string>{"+", "-", "+", "-"}) == 4);
  CHECK_THROWS_AS(count_bins(std::vector<int>{}), DomainError);

  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    std::vector<int> seq(1 + rng.below(300));
    const auto classes = 1 + rng.below(4);
    for (auto& x : seq) x = static_cast<int>(rng.below(classes));
    const auto bins = count_bins(seq);
    CHECK(bins == rwheel::testing::brute_runs(seq));
    CHECK(bins >= 1);
    CHECK(bins <= seq.size());
  }
}

TEST_CASE("parse_value is strict about kinds") {
  CHECK(is_missing(parse_value("?", AttributeKind::real)));
  CHECK(std::get<double>(parse_value("30.83", AttributeKind::real)) == 30.83);
  CHECK(std::get<std::int64_t>(parse_value("202", AttributeKind::integer)) == 202);
  CHECK(std::get<Categorical>(parse_value("gg", AttributeKind::categorical)).token == "gg");
  CHECK_THROWS_AS(parse_value("abc", AttributeKind::real), ParseError);
  CHECK_THROWS_AS(parse_value("1.5", AttributeKind::integer), ParseError);
  CHECK_THROWS_AS(parse_value("nan", AttributeKind::real), ParseError);
  CHECK_THROWS_AS(parse_value("inf", AttributeKind::real), ParseError);
  CHECK_THROWS_AS(parse_value("1e999", AttributeKind::real), ParseError);
  CHECK(format_value(Value{0.1}) == "0.1");
  CHECK(format_value(Value{Missing{}}) == "?");
}

TEST_CASE("parse_dataset on a credit row") {
  const auto schema = parse_schema(kCreditSchema);
  REQUIRE(schema.attributes.size() == 15);
  CHECK(schema.class_column == 15);
  const auto ds = parse_dataset("b,30.83,0,u,g,w,v,1.25,t,t,1,f,g,202,0,+\na,?,4.46,u,g,q,h,3.04,t,t,6,f,g,43,560,-\n",
                                schema);
  REQUIRE(ds.size() == 2);
  CHECK(ds.attribute_count() == 15);
  CHECK(ds.record(0).label == "+");
  CHECK(std::get<double>(ds.value(0, 1)) == 30.83);
  CHECK(std::get<std::int64_t>(ds.value(0, 13)) == 202);
  CHECK(is_missing(ds.value(1, 1)));
  CHECK(ds.class_tokens() == std::vector<std::string>{"+", "-"});
}

TEST_CASE("parse_dataset errors") {
  const auto schema = parse_schema(kCreditSchema);
  CHECK_THROWS_WITH_AS(parse_dataset("", schema), doctest::Contains("no records"), ParseError);
  CHECK_THROWS_WITH_AS(parse_dataset("\n\n", schema), doctest::Contains("no records"), ParseError);

  try {
    parse_dataset("b,30.83,0,u,g,w,v,1.25,t,t,1,f,g,202,0,+\nb,30.83,0,u,g\n", schema);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_dataset("b,abc,0,u,g,w,v,1.25,t,t,1,f,g,202,0,+\n", schema), ParseError);
  CHECK_THROWS_WITH_AS(parse_dataset("b,30.83,0,u,g,w,v,1.25,t,t,1,f,g,202,0,maybe\n", schema),
                       doctest::Contains("unknown class token"), ParseError);
  CHECK_THROWS_AS(parse_dataset("b,30.83,0,u,g,w,v,1.25,t,t,1,f,g,202,0,?\n", schema), ParseError);
}

TEST_CASE("class tokens follow first appearance without a declaration") {
  const std::vector<AttributeSchema> schema{{"x", AttributeKind::integer, 0}};
  const auto ds = parse_dataset("1,no\n2,yes\n3,no\n", schema, 1);
  CHECK(ds.class_tokens() == std::vector<std::string>{"no", "yes"});
  CHECK_THROWS_WITH_AS(parse_dataset("1,no\n2,no\n", schema, 1), doctest::Contains("at least 2"), ParseError);
}

TEST_CASE("class column can sit anywhere") {
  const std::vector<AttributeSchema> schema{{"a", AttributeKind::categorical, 0}, {"b", AttributeKind::real, 1}};
  const auto ds = parse_dataset("+,x,1.5\n-,y,2\n", schema, 0);
  CHECK(ds.record(0).label == "+");
  CHECK(std::get<Categorical>(ds.value(0, 0)).token == "x");
  CHECK(std::get<double>(ds.value(1, 1)) == 2.0);
}

TEST_CASE("serialize then parse round-trips") {
  const auto original = rwheel::testing::synthetic_credit(200, 3);
  SchemaFile schema{original.schema(), original.attribute_count(), original.class_tokens()};
  const auto text = serialize_dataset(original);
  const auto again = parse_dataset(text, schema);
  CHECK(again.records() == original.records());
  CHECK(serialize_dataset(again) == text);
  CHECK(text.find('?') != std::string::npos);

  const auto schema_again = parse_schema(format_schema(schema));
  CHECK(schema_again.attributes == schema.attributes);
  CHECK(schema_again.class_tokens == schema.class_tokens);
}

TEST_CASE("schema sidecar") {
  const auto s = parse_schema("# comment\n\nage,integer\nlabel,class\ncolour,categorical\n");
  REQUIRE(s.attributes.size() == 2);
  CHECK(s.class_column == 1);
  CHECK(s.attributes[1].name == "colour");
  CHECK(s.attributes[1].position == 1);
  // Without a class line the label follows the listed attributes.
  const auto implicit = parse_schema("a,real\nb,categorical\n");
  CHECK(implicit.attributes.size() == 2);
  CHECK(implicit.class_column == 2);
  CHECK_THROWS_AS(parse_schema("a,complex\n"), ParseError);
  CHECK_THROWS_AS(parse_schema("a,class\nb,class\n"), ParseError);
  CHECK_THROWS_AS(parse_schema("# nothing\n"), ParseError);
}

TEST_CASE("infer_schema") {
  const auto s = infer_schema("a,1,2.5,+\nb,?,3,-\n");
  REQUIRE(s.attributes.size() == 3);
  CHECK(s.attributes[0].kind == AttributeKind::categorical);
  CHECK(s.attributes[1].kind == AttributeKind::integer);
  CHECK(s.attributes[2].kind == AttributeKind::real);
  CHECK(s.attributes[0].name == "A01");
  CHECK(s.class_column == 3);
}

TEST_CASE("class_prior") {
  const auto ds = labels_only({"+", "+", "+", "-"});
  const auto prior = class_prior(ds);
  CHECK(prior[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(prior[1] == doctest::Approx(0.25).epsilon(1e-15));

  const auto pure = class_prior(labels_only({"+", "+"}));
  CHECK(pure[0] == 1.0);
  CHECK(pure[1] == 0.0);

  const auto credit = rwheel::testing::synthetic_credit();
  const auto p = class_prior(credit);
  CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
}

TEST_CASE("attribute_stddev") {
  const std::vector<AttributeSchema> schema{{"v", AttributeKind::real, 0}, {"c", AttributeKind::categorical, 1}};
  const auto constant = parse_dataset("2,a,+\n2,a,-\n2,b,+\n", schema, 2);
  CHECK(attribute_stddev(constant, 0) == 0.0);
  const auto pair = parse_dataset("1,a,+\n?,a,-\n3,b,+\n", schema, 2);
  CHECK(attribute_stddev(pair, 0) == 1.0);
  CHECK_THROWS_AS(attribute_stddev(pair, 1), DomainError);
  const auto empty = parse_dataset("?,a,+\n?,a,-\n", schema, 2);
  CHECK_THROWS_AS(attribute_stddev(empty, 0), DomainError);

  const auto credit = rwheel::testing::synthetic_credit();
  std::vector<double> column;
  for (const auto& r : credit.records()) {
    if (!is_missing(r.values[1])) column.push_back(numeric_value(r.values[1]));
  }
  CHECK(attribute_stddev(credit, 1) == doctest::Approx(rwheel::testing::population_sigma(column)).epsilon(1e-12));
}

TEST_CASE("stratified_folds") {
  const auto ten = labels_only({"+", "-", "+", "-", "+", "-", "+", "-", "+", "-"});
  const auto folds = stratified_folds(ten, 5, 1);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = folds.test_indices(f);
    REQUIRE(test.size() == 2);
    CHECK(ten.label_index(test[0]) != ten.label_index(test[1]));
  }
  CHECK_THROWS_AS(stratified_folds(ten, 1, 1), DomainError);
  CHECK_THROWS_AS(stratified_folds(ten, 11, 1), DomainError);

  const auto credit = rwheel::testing::synthetic_credit();
  const auto a = stratified_folds(credit, 10, 7);
  CHECK(a.fold_of == stratified_folds(credit, 10, 7).fold_of);
  CHECK(a.fold_of != stratified_folds(credit, 10, 8).fold_of);

  const auto prior = class_prior(credit);
  std::set<std::size_t> seen;
  for (std::size_t f = 0; f < 10; ++f) {
    const auto test = a.test_indices(f);
    const auto train = a.train_indices(f);
    CHECK(test.size() + train.size() == credit.size());
    seen.insert(test.begin(), test.end());
    for (std::size_t c = 0; c < credit.class_count(); ++c) {
      const auto in_fold = std::ranges::count_if(test, [&](std::size_t i) { return credit.label_index(i) == c; });
      const double expected = prior[c] * static_cast<double>(test.size());
      CHECK(std::abs(static_cast<double>(in_fold) - expected) <= 1.0 + 1e-9);
    }
  }
  CHECK(seen.size() == credit.size());
}

TEST_CASE("dataset invariants") {
  const std::vector<AttributeSchema> schema{{"x", AttributeKind::integer, 0}};
  CHECK_THROWS_AS(Dataset(schema, {"+"}, {{{std::int64_t{1}}, "+"}}), DomainError);
  CHECK_THROWS_AS(Dataset(schema, {"+", "-"}, {}), DomainError);
  CHECK_THROWS_AS(Dataset(schema, {"+", "-"}, {{{2.5}, "+"}}), DomainError);
  CHECK_THROWS_AS(Dataset(schema, {"+", "-"}, {{{std::int64_t{1}}, "?"}}), DomainError);

  const auto ds = labels_only({"+", "-"});
  CHECK_THROWS_AS(ds.check_observation({Value{1.5}}), SchemaError);
  CHECK_THROWS_AS(ds.check_observation({}), SchemaError);
  CHECK_NOTHROW(ds.check_observation({Value{Missing{}}}));
}

TEST_CASE("with_permuted_labels keeps the label multiset") {
  const auto credit = rwheel::testing::synthetic_credit();
  const auto shuffled = credit.with_permuted_labels(5);
  CHECK(class_prior(shuffled) == class_prior(credit));
  CHECK(shuffled.records()[0].values == credit.records()[0].values);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < credit.size(); ++i) moved += shuffled.label_index(i) != credit.label_index(i);
  CHECK(moved > 100);
}
