#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rwheel/dataset.hpp"
#include "rwheel/random.hpp"

namespace rwheel::testing {

inline constexpr const char* kCreditSchema =
    "A01,categorical\nA02,real\nA03,real\nA04,categorical\nA05,categorical\nA06,categorical\n"
    "A07,categorical\nA08,real\nA09,categorical\nA10,categorical\nA11,integer\nA12,categorical\n"
    "A13,categorical\nA14,integer\nA15,integer\nA16,class,+,-\n";

// Mimics the layout of the credit-approval table: 15 attributes named A01..A15,
// nine categorical and six numeric, classes "+" and "-", a few missing cells,
// and one binary attribute (A09) carrying most of the signal.
inline Dataset synthetic_credit(std::size_t n = 690, std::uint64_t seed = 7) {
  Rng rng(seed);
  auto uniform = [&] { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; };
  auto pick = [&](const std::vector<std::string>& levels) { return Categorical{levels[rng.below(levels.size())]}; };
  auto maybe_missing = [&](Value v, double rate) { return uniform() < rate ? Value{Missing{}} : v; };

  std::vector<AttributeSchema> schema;
  const char* kinds = "crrccccrcciccii";
  for (std::size_t a = 0; a < 15; ++a) {
    const AttributeKind kind = kinds[a] == 'c'   ? AttributeKind::categorical
                               : kinds[a] == 'i' ? AttributeKind::integer
                                                 : AttributeKind::real;
    schema.push_back({(a < 9 ? "A0" : "A") + std::to_string(a + 1), kind, a});
  }

  const std::vector<std::string> jobs{"c", "d", "cc", "i", "j", "k", "m", "r", "q", "w", "x", "e", "aa", "ff"};
  const std::vector<std::string> homes{"v", "h", "bb", "j", "n", "z", "dd", "ff", "o"};

  std::vector<Record> records;
  for (std::size_t i = 0; i < n; ++i) {
    const bool prior_default = uniform() < 0.52;
    const bool employed = uniform() < (prior_default ? 0.6 : 0.25);
    const double years = std::round(std::pow(uniform(), 2.0) * 12.0 * 1000) / 1000;
    const std::int64_t credit_lines = employed ? static_cast<std::int64_t>(rng.below(15)) + 1 : 0;
    double z = -2.4 + 3.6 * prior_default + 0.7 * employed + 0.18 * static_cast<double>(credit_lines) + 0.25 * years;
    z += 1.2 * (uniform() - 0.5);
    const bool approved = uniform() < 1.0 / (1.0 + std::exp(-z));

    Observation v(15);
    v[0] = maybe_missing(pick({"a", "b"}), 0.02);
    v[1] = maybe_missing(std::round((18 + 50 * uniform()) * 100) / 100, 0.02);
    v[2] = std::round(28 * std::pow(uniform(), 2.0) * 1000) / 1000;
    v[3] = maybe_missing(pick({"u", "y", "l"}), 0.01);
    v[4] = maybe_missing(pick({"g", "p", "gg"}), 0.01);
    v[5] = maybe_missing(pick(jobs), 0.01);
    v[6] = maybe_missing(pick(homes), 0.01);
    v[7] = years;
    v[8] = Categorical{prior_default ? "t" : "f"};
    v[9] = Categorical{employed ? "t" : "f"};
    v[10] = credit_lines;
    v[11] = pick({"t", "f"});
    v[12] = pick({"g", "p", "s"});
    v[13] = maybe_missing(static_cast<std::int64_t>(rng.below(400)), 0.02);
    v[14] = static_cast<std::int64_t>(approved ? rng.below(5000) : rng.below(800));
    records.push_back({std::move(v), approved ? "+" : "-"});
  }
  return Dataset(std::move(schema), {"+", "-"}, std::move(records));
}

// Two categorical attributes on a small set. "key" matches the label exactly,
// "noise" alternates independently of it.
inline Dataset separable_dataset(std::size_t n = 10) {
  std::vector<AttributeSchema> schema{{"key", AttributeKind::categorical, 0},
                                      {"noise", AttributeKind::categorical, 1}};
  std::vector<Record> records;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    records.push_back({{Categorical{pos ? "yes" : "no"}, Categorical{(i / 2) % 2 ? "x" : "y"}}, pos ? "+" : "-"});
  }
  return Dataset(std::move(schema), {"+", "-"}, std::move(records));
}

}  // namespace rwheel::testing
