#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rwheel/wheel.hpp"

namespace rwheel {

inline constexpr int kModelFormatVersion = 1;

/// Self-describing JSON document: format version, config, schema, class
/// tokens, priors, sigmas, the ranked factor table and the training records.
/// Numbers use shortest round-trip decimal form, so reloading is bit-exact.
nlohmann::json model_to_json(const RandomWheelModel& model);
std::string save_model(const RandomWheelModel& model);

/// Throws ModelFormatError on any structural or consistency problem.
RandomWheelModel model_from_json(const nlohmann::json& doc);
RandomWheelModel load_model(std::string_view text);

void write_model_file(const RandomWheelModel& model, const std::filesystem::path& path);
RandomWheelModel read_model_file(const std::filesystem::path& path);

/// Short stable identifier for a model, derived from its serialized form.
std::string model_version(const RandomWheelModel& model);

nlohmann::json config_to_json(const WheelConfig& config);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rwheel
