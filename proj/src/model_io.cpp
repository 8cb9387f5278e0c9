#include "rwheel/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rwheel/error.hpp"
#include "rwheel/random.hpp"

namespace rwheel {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "random-wheel-model";

std::uint64_t get_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ModelFormatError("seed must be a non-negative integer");
}

}  // namespace

json config_to_json(const WheelConfig& config) {
  return json{{"depth", config.depth},
              {"noise_fraction", config.noise_fraction},
              {"trials", config.trials},
              {"importance_shuffles", config.importance_shuffles},
              {"neighbor_window", config.neighbor_window},
              {"seed", config.seed}};
}

json model_to_json(const RandomWheelModel& model) {
  const auto& ds = model.dataset();
  json schema = json::array();
  for (const auto& a : ds.schema()) schema.push_back({{"name", a.name}, {"kind", to_string(a.kind)}});

  json sigmas = json::array();
  for (const auto& s : model.sigmas()) sigmas.push_back(s ? json(*s) : json(nullptr));

  json factors = json::array();
  for (const auto& s : model.factor_table().scores) {
    factors.push_back({{"attributes", std::vector<std::size_t>(s.factor.attributes().begin(), s.factor.attributes().end())},
                       {"default_ratio", s.default_ratio},
                       {"factor_ratio", s.factor_ratio},
                       {"importance", s.importance}});
  }

  json records = json::array();
  for (const auto& r : ds.records()) {
    json row = json::array();
    for (const auto& v : r.values) row.push_back(format_value(v));
    row.push_back(r.label);
    records.push_back(std::move(row));
  }

  return json{{"format", kFormatName},
              {"version", kModelFormatVersion},
              {"config", config_to_json(model.config())},
              {"schema", std::move(schema)},
              {"class_tokens", ds.class_tokens()},
              {"priors", model.priors()},
              {"sigmas", std::move(sigmas)},
              {"factor_table", {{"discarded_count", model.factor_table().discarded_count}, {"scores", std::move(factors)}}},
              {"records", std::move(records)}};
}

std::string save_model(const RandomWheelModel& model) { return model_to_json(model).dump(1) + "\n"; }

RandomWheelModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormatName) throw ModelFormatError("not a random wheel model");
    if (!doc.contains("version")) throw ModelFormatError("model file has no version");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw ModelFormatError("unsupported model version " + doc.at("version").dump());
    }

    const auto& c = doc.at("config");
    WheelConfig config;
    config.depth = c.at("depth").get<std::size_t>();
    config.noise_fraction = c.at("noise_fraction").get<double>();
    config.trials = c.at("trials").get<std::size_t>();
    config.importance_shuffles = c.at("importance_shuffles").get<std::size_t>();
    config.neighbor_window = c.at("neighbor_window").get<double>();
    config.seed = get_seed(c.at("seed"));
    config.validate();

    std::vector<AttributeSchema> schema;
    for (const auto& a : doc.at("schema")) {
      const auto kind = parse_attribute_kind(a.at("kind").get<std::string>());
      if (!kind) throw ModelFormatError("unknown attribute kind in schema");
      schema.push_back({a.at("name").get<std::string>(), *kind, schema.size()});
    }
    auto class_tokens = doc.at("class_tokens").get<std::vector<std::string>>();

    std::vector<Record> records;
    for (const auto& row : doc.at("records")) {
      if (!row.is_array() || row.size() != schema.size() + 1) throw ModelFormatError("record has wrong field count");
      Record r;
      for (std::size_t a = 0; a < schema.size(); ++a) {
        r.values.push_back(parse_value(row[a].get<std::string>(), schema[a].kind));
      }
      r.label = row.back().get<std::string>();
      records.push_back(std::move(r));
    }
    Dataset dataset(std::move(schema), std::move(class_tokens), std::move(records));

    FactorTable table;
    const auto& ft = doc.at("factor_table");
    table.discarded_count = ft.at("discarded_count").get<std::size_t>();
    for (const auto& s : ft.at("scores")) {
      FactorScore score{Factor(s.at("attributes").get<std::vector<std::size_t>>()), s.at("default_ratio").get<double>(),
                        s.at("factor_ratio").get<double>(), s.at("importance").get<double>()};
      if (score.importance != score.default_ratio - score.factor_ratio) {
        throw ModelFormatError("factor importance is not default_ratio - factor_ratio");
      }
      table.scores.push_back(std::move(score));
    }
    if (table.scores.empty()) throw ModelFormatError("factor table is empty");

    auto priors = doc.at("priors").get<std::vector<double>>();
    std::vector<std::optional<double>> sigmas;
    for (const auto& s : doc.at("sigmas")) sigmas.push_back(s.is_null() ? std::nullopt : std::optional(s.get<double>()));

    return RandomWheelModel(std::move(dataset), std::move(table), config, std::move(priors), std::move(sigmas));
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("invalid model: ") + e.what());
  }
}

RandomWheelModel load_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_model_file(const RandomWheelModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << save_model(model);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RandomWheelModel read_model_file(const std::filesystem::path& path) { return load_model(read_text_file(path)); }

std::string model_version(const RandomWheelModel& model) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rw%d-%016llx", kModelFormatVersion,
                static_cast<unsigned long long>(fnv1a(save_model(model))));
  return buf;
}

}  // namespace rwheel
