#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rwheel/explain.hpp"
#include "rwheel/wheel.hpp"

namespace rwheel {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path model_path;
  std::size_t max_body_bytes = 64 * 1024;
  std::chrono::seconds request_timeout{10};
  std::vector<std::string> cors_origins;  // "*" allows any origin
};

/// Index of the class rendered as "approve": `+` when present, else the first token.
std::size_t approval_class(const Dataset& dataset);

/// Builds an observation from an attribute-name -> value object. Absent or
/// null attributes are missing. Throws SchemaError naming the field on unknown
/// attributes or type mismatches.
Observation observation_from_json(const nlohmann::json& body, const Dataset& dataset);

nlohmann::json recommendation_to_json(const RandomWheelModel& model, const Recommendation& recommendation,
                                      const AttributionReport& report, std::string_view model_version);
nlohmann::json factors_to_json(const RandomWheelModel& model, std::optional<std::size_t> top);
nlohmann::json model_metadata_json(const RandomWheelModel& model, std::string_view model_version);

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Stateless request handlers over one immutable model.
class RecommendationHandlers {
 public:
  explicit RecommendationHandlers(std::shared_ptr<const RandomWheelModel> model);

  HttpReply recommend(std::string_view body) const;
  HttpReply model_info() const { return {200, model_info_}; }
  /// `top` is the raw query value, if given.
  HttpReply factors(const std::optional<std::string>& top) const;

  const RandomWheelModel& model() const { return *model_; }
  const std::string& version() const { return version_; }

 private:
  std::shared_ptr<const RandomWheelModel> model_;
  std::string version_;
  std::string model_info_;
};

/// HTTP/1.1 facade. The listener comes up before the model so /healthz can
/// report 503 while loading; every other endpoint answers 503 until then too.
class RecommendationServer {
 public:
  explicit RecommendationServer(ServiceConfig config);
  ~RecommendationServer();
  RecommendationServer(const RecommendationServer&) = delete;
  RecommendationServer& operator=(const RecommendationServer&) = delete;

  /// Binds the socket; returns the bound port. Throws std::runtime_error on failure.
  int bind();
  /// Serves until stop(). Call after bind().
  void listen();
  /// Blocks until listen() is accepting connections.
  void wait_until_listening() const;
  void stop();

  void install(std::shared_ptr<const RandomWheelModel> model);
  bool ready() const { return handlers() != nullptr; }

 private:
  std::shared_ptr<const RecommendationHandlers> handlers() const;

  struct Impl;
  ServiceConfig config_;
  mutable std::mutex handlers_mutex_;
  std::shared_ptr<const RecommendationHandlers> handlers_;
  std::unique_ptr<Impl> impl_;
};

/// Binds, loads config.model_path in the background and serves. Returns
/// nonzero (after shutting the listener) if the model fails to load.
int run_service(const ServiceConfig& config);

}  // namespace rwheel
