#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "rwheel/error.hpp"
#include "rwheel/factors.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rwheel;
using rwheel::testing::brute_runs;

namespace {

Dataset make(std::vector<AttributeSchema> schema, std::vector<Record> records) {
  return Dataset(std::move(schema), {"+", "-"}, std::move(records));
}

Dataset balanced(std::size_t n) {
  std::vector<Record> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back({{Categorical{i % 2 ? "b" : "a"}, Categorical{"k"}}, i % 2 ? "-" : "+"});
  }
  return make({{"sep", AttributeKind::categorical, 0}, {"const", AttributeKind::categorical, 1}}, std::move(records));
}

// Exhaustive mean of bins over every ordering of the rows, followed by a
// stable sort on the given attribute order. Rows are compared by value.
double exhaustive_factor_bins(const Dataset& ds, const std::vector<std::size_t>& key_order) {
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0;
  std::size_t count = 0;
  do {
    auto sorted = perm;
    std::ranges::stable_sort(sorted, [&](std::size_t x, std::size_t y) {
      for (std::size_t a : key_order) {
        const double vx = numeric_value(ds.value(x, a));
        const double vy = numeric_value(ds.value(y, a));
        if (vx != vy) return vx < vy;
      }
      return false;
    });
    std::vector<std::string> labels;
    for (std::size_t r : sorted) labels.push_back(ds.record(r).label);
    total += static_cast<double>(brute_runs(labels));
    ++count;
  } while (std::ranges::next_permutation(perm).found);
  return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("enumerate_factors matches a subset generator") {
  CHECK(enumerate_factors(15, 3).size() == 575);
  CHECK(enumerate_factors(3, 1).size() == 3);
  const auto two = enumerate_factors(2, 2);
  REQUIRE(two.size() == 3);
  CHECK(two[2] == Factor({0, 1}));
  CHECK_THROWS_AS(enumerate_factors(3, 0), DomainError);
  CHECK_THROWS_AS(enumerate_factors(3, 4), DomainError);

  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t d = 1; d <= n; ++d) {
      std::set<std::vector<std::size_t>> expected;
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) > d) continue;
        std::vector<std::size_t> s;
        for (std::size_t a = 0; a < n; ++a) {
          if (mask & (1u << a)) s.push_back(a);
        }
        expected.insert(s);
      }
      const auto got = enumerate_factors(n, d);
      std::set<std::vector<std::size_t>> seen;
      for (const auto& f : got) seen.insert({f.attributes().begin(), f.attributes().end()});
      CHECK(got.size() == expected.size());
      CHECK(seen == expected);
      CHECK(std::ranges::is_sorted(got));
    }
  }
}

TEST_CASE("Factor basics") {
  CHECK_THROWS_AS(Factor(std::vector<std::size_t>{}), DomainError);
  CHECK_THROWS_AS(Factor({1, 1}), DomainError);
  const Factor f({3, 1});
  CHECK(f.attributes()[0] == 1);
  CHECK(f.contains(3));
  CHECK_FALSE(f.contains(2));
  CHECK(Factor({5}) < Factor({0, 1}));
  CHECK(Factor({0, 2}) < Factor({1, 2}));
}

TEST_CASE("default_bin_ratio") {
  std::vector<Record> pure;
  for (int i = 0; i < 7; ++i) pure.push_back({{std::int64_t{i}}, "+"});
  const auto single = make({{"x", AttributeKind::integer, 0}}, pure);
  CHECK(default_bin_ratio(single, 50, 1) == 1.0 / 7.0);

  const auto pair = make({{"x", AttributeKind::integer, 0}}, {{{std::int64_t{0}}, "+"}, {{std::int64_t{1}}, "-"}});
  CHECK(default_bin_ratio(pair, 50, 1) == 1.0);

  const auto ten = balanced(10);
  std::vector<std::string> labels;
  for (const auto& r : ten.records()) labels.push_back(r.label);
  const double exhaustive = rwheel::testing::exhaustive_mean_runs(labels) / 10.0;
  CHECK(exhaustive == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::abs(default_bin_ratio(ten, 10000, 3) - exhaustive) <= 0.02);
  CHECK(default_bin_ratio(ten, 200, 9) == default_bin_ratio(ten, 200, 9));
}

TEST_CASE("factor_bin_ratio of a separating factor has no variance") {
  for (std::size_t n : {10u, 11u, 100u}) {
    const auto ds = balanced(n);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      CHECK(factor_bin_ratio(ds, Factor({0}), 37, seed) == 2.0 / static_cast<double>(n));
    }
  }
  std::vector<Record> three;
  for (std::size_t i = 0; i < 30; ++i) {
    const char* tok[] = {"a", "b", "c"};
    three.push_back({{Categorical{tok[i % 3]}}, i % 3 == 0 ? "+" : (i % 3 == 1 ? "-" : "0")});
  }
  const Dataset ds3({{"k", AttributeKind::categorical, 0}}, {"+", "-", "0"}, three);
  CHECK(factor_bin_ratio(ds3, Factor({0}), 20, 4) == 3.0 / 30.0);
}

TEST_CASE("constant factor behaves like the default ratio") {
  const auto ds = balanced(10);
  const double b = *factor_bin_ratio(ds, Factor({1}), 20000, 2);
  CHECK(std::abs(b - 0.6) <= 0.02);
}

TEST_CASE("factor_bin_ratio drops records missing a factor attribute") {
  const std::vector<AttributeSchema> schema{{"k", AttributeKind::categorical, 0}, {"m", AttributeKind::real, 1}};
  std::vector<Record> records{{{Categorical{"a"}, Value{Missing{}}}, "+"},
                              {{Categorical{"b"}, Value{Missing{}}}, "-"},
                              {{Categorical{"a"}, Value{1.0}}, "+"},
                              {{Categorical{"b"}, Value{2.0}}, "-"},
                              {{Categorical{"a"}, Value{3.0}}, "+"}};
  const auto ds = make(schema, records);
  // Three rows survive; ordering (k, m) gives 2 bins and (m, k) gives 3.
  CHECK(factor_bin_ratio(ds, Factor({0, 1}), 10, 1) == 2.5 / 3.0);

  std::vector<Record> all_missing{{{Categorical{"a"}, Value{Missing{}}}, "+"},
                                  {{Categorical{"b"}, Value{Missing{}}}, "-"}};
  const auto empty = make(schema, all_missing);
  CHECK_FALSE(factor_bin_ratio(empty, Factor({1}), 10, 1).has_value());
  CHECK_FALSE(score_factor(empty, Factor({1}), 10, 1).has_value());
}

TEST_CASE("two-attribute factor against the exhaustive ordering oracle") {
  const std::vector<AttributeSchema> schema{{"a", AttributeKind::integer, 0}, {"b", AttributeKind::integer, 1}};
  const int a[] = {0, 0, 1, 1, 0, 1, 0, 1};
  const int b[] = {0, 1, 0, 1, 1, 0, 0, 1};
  const char* y[] = {"+", "-", "+", "+", "-", "-", "+", "-"};
  std::vector<Record> records;
  for (int i = 0; i < 8; ++i) records.push_back({{std::int64_t{a[i]}, std::int64_t{b[i]}}, y[i]});
  const auto ds = make(schema, records);

  const double oracle = (exhaustive_factor_bins(ds, {0, 1}) + exhaustive_factor_bins(ds, {1, 0})) / 2.0 / 8.0;
  const double got = *factor_bin_ratio(ds, Factor({0, 1}), 20000, 5);
  CHECK(std::abs(got - oracle) <= 0.02);
}

TEST_CASE("score_factor signs") {
  const auto ds = balanced(100);
  const auto sep = *score_factor(ds, Factor({0}), 100, 3);
  CHECK(sep.factor_ratio == 0.02);
  CHECK(sep.importance == sep.default_ratio - 0.02);
  CHECK(sep.importance > 0);

  // Sorting on k interleaves the classes perfectly, so every pair changes.
  std::vector<Record> records;
  for (int i = 0; i < 20; ++i) records.push_back({{std::int64_t{i}}, i % 2 ? "-" : "+"});
  const auto alt = make({{"k", AttributeKind::integer, 0}}, records);
  const auto anti = *score_factor(alt, Factor({0}), 100, 3);
  CHECK(anti.factor_ratio == 1.0);
  CHECK(anti.importance < 0);
  CHECK(anti.importance == anti.default_ratio - anti.factor_ratio);
}

TEST_CASE("build_factor_table") {
  const auto ds = balanced(40);
  const auto table = build_factor_table(ds, 1, 200, 8);
  REQUIRE_FALSE(table.scores.empty());
  CHECK(table.scores.front().factor == Factor({0}));
  CHECK(table.scores.size() + table.discarded_count == 2);
  if (table.scores.size() == 2) CHECK(table.scores[1].importance < 0.05);

  const auto credit = rwheel::testing::synthetic_credit(300, 2);
  const auto full = build_factor_table(credit, 2, 60, 4, 1);
  CHECK(full.scores.size() + full.discarded_count == 15 + 105);
  for (std::size_t i = 0; i < full.scores.size(); ++i) {
    const auto& s = full.scores[i];
    CHECK(s.importance > 0);
    CHECK(s.importance == s.default_ratio - s.factor_ratio);
    CHECK(s.default_ratio > 0);
    CHECK(s.default_ratio <= 1);
    CHECK(s.factor_ratio > 0);
    CHECK(s.factor_ratio <= 1);
    if (i + 1 < full.scores.size()) {
      const auto& t = full.scores[i + 1];
      CHECK(s.importance >= t.importance);
      if (s.importance == t.importance) CHECK(s.factor < t.factor);
    }
    const auto single = score_factor(credit, s.factor, 60, 4);
    REQUIRE(single.has_value());
    CHECK(single->importance == s.importance);
  }
  CHECK(full.scores.front().factor.contains(8));

  const auto parallel = build_factor_table(credit, 2, 60, 4, 4);
  REQUIRE(parallel.scores.size() == full.scores.size());
  for (std::size_t i = 0; i < full.scores.size(); ++i) {
    CHECK(parallel.scores[i].factor == full.scores[i].factor);
    CHECK(parallel.scores[i].importance == full.scores[i].importance);
  }
}

TEST_CASE("pure noise leaves little or nothing") {
  Rng rng(77);
  std::vector<Record> records;
  for (int i = 0; i < 200; ++i) {
    records.push_back({{Categorical{rng.below(2) ? "x" : "y"}, Categorical{rng.below(2) ? "p" : "q"}},
                       rng.below(2) ? "+" : "-"});
  }
  const auto ds = make({{"u", AttributeKind::categorical, 0}, {"v", AttributeKind::categorical, 1}}, records);
  try {
    const auto table = build_factor_table(ds, 2, 100, 1);
    for (const auto& s : table.scores) CHECK(s.importance < 0.05);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("no informative factors") != std::string::npos);
  }

  std::vector<Record> constant;
  for (int i = 0; i < 20; ++i) constant.push_back({{Categorical{"same"}}, i % 2 ? "-" : "+"});
  const auto flat = make({{"c", AttributeKind::categorical, 0}}, constant);
  // A constant key leaves the shuffled order intact; any importance is sampling noise.
  try {
    const auto table = build_factor_table(flat, 1, 100, 1);
    CHECK(table.scores.front().importance < 0.05);
  } catch (const DomainError&) {
  }
}
