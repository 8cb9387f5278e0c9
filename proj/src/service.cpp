#include "rwheel/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <cmath>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "rwheel/error.hpp"
#include "rwheel/model_io.hpp"

namespace rwheel {

using nlohmann::json;

std::size_t approval_class(const Dataset& dataset) { return dataset.class_index("+").value_or(0); }

Observation observation_from_json(const json& body, const Dataset& dataset) {
  if (!body.is_object()) throw SchemaError("request body must be a JSON object of attribute values");
  Observation obs(dataset.attribute_count(), Missing{});
  for (const auto& [name, value] : body.items()) {
    const auto index = dataset.attribute_index(name);
    if (!index) throw SchemaError("unknown attribute '" + name + "'", name);
    if (value.is_null()) continue;
    const auto kind = dataset.schema()[*index].kind;
    switch (kind) {
      case AttributeKind::categorical:
        if (!value.is_string()) throw SchemaError(name + " expects a categorical token (string)", name);
        obs[*index] = Categorical{value.get<std::string>()};
        break;
      case AttributeKind::integer:
        if (value.is_number_integer()) {
          obs[*index] = value.get<std::int64_t>();
        } else if (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>() &&
                   std::abs(value.get<double>()) < 9.0e15) {
          obs[*index] = static_cast<std::int64_t>(value.get<double>());
        } else {
          throw SchemaError(name + " expects an integer", name);
        }
        break;
      case AttributeKind::real:
        if (!value.is_number()) throw SchemaError(name + " expects a number", name);
        obs[*index] = value.get<double>();
        break;
    }
  }
  return obs;
}

json recommendation_to_json(const RandomWheelModel& model, const Recommendation& recommendation,
                            const AttributionReport& report, std::string_view model_version) {
  const auto& ds = model.dataset();
  json attributions = json::array();
  for (const auto& e : report.entries) {
    attributions.push_back({{"attribute", e.attribute}, {"percentage", e.percentage}, {"contribution", e.contribution}});
  }
  json velocity = json::object();
  for (std::size_t j = 0; j < ds.class_count(); ++j) velocity[ds.class_tokens()[j]] = recommendation.aggregate_velocity[j];
  return {{"label", recommendation.label},
          {"approve", recommendation.winner == approval_class(ds)},
          {"confidence", recommendation.confidence},
          {"attributions", std::move(attributions)},
          {"explanation_signal", report.has_signal},
          {"aggregate_velocity", std::move(velocity)},
          {"model_version", model_version},
          {"trial_count", recommendation.trials.size()}};
}

json factors_to_json(const RandomWheelModel& model, std::optional<std::size_t> top) {
  const auto& scores = model.factor_table().scores;
  const std::size_t n = top ? std::min(*top, scores.size()) : scores.size();
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scores[i];
    json names = json::array();
    for (std::size_t a : s.factor.attributes()) names.push_back(model.dataset().schema()[a].name);
    rows.push_back({{"rank", i + 1}, {"attributes", std::move(names)}, {"importance", s.importance}});
  }
  return {{"total", scores.size()}, {"discarded", model.factor_table().discarded_count}, {"factors", std::move(rows)}};
}

json model_metadata_json(const RandomWheelModel& model, std::string_view model_version) {
  const auto& ds = model.dataset();
  json attributes = json::array();
  for (const auto& a : ds.schema()) {
    json entry{{"name", a.name}, {"kind", to_string(a.kind)}, {"position", a.position}};
    if (a.kind == AttributeKind::categorical) {
      std::vector<std::string> levels;
      for (const auto& r : ds.records()) {
        if (const auto* c = std::get_if<Categorical>(&r.values[a.position])) levels.push_back(c->token);
      }
      std::ranges::sort(levels);
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      entry["levels"] = levels;
    }
    attributes.push_back(std::move(entry));
  }
  return {{"model_version", model_version},
          {"attributes", std::move(attributes)},
          {"class_tokens", ds.class_tokens()},
          {"approve_label", ds.class_tokens()[approval_class(ds)]},
          {"config", config_to_json(model.config())},
          {"factor_count", model.factor_table().scores.size()},
          {"training_records", ds.size()}};
}

namespace {

std::string error_body(std::string_view message, std::string_view field = {}) {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  return body.dump();
}

}  // namespace

RecommendationHandlers::RecommendationHandlers(std::shared_ptr<const RandomWheelModel> model)
    : model_(std::move(model)), version_(model_version(*model_)),
      model_info_(model_metadata_json(*model_, version_).dump()) {}

HttpReply RecommendationHandlers::recommend(std::string_view body) const {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return {400, error_body(std::string("malformed JSON: ") + e.what())};
  }
  try {
    const auto obs = observation_from_json(doc, model_->dataset());
    const auto rec = rwheel::recommend(*model_, obs);
    const auto report = aggregate_explanation(rec, model_->dataset().schema());
    return {200, recommendation_to_json(*model_, rec, report, version_).dump()};
  } catch (const SchemaError& e) {
    return {400, error_body(e.what(), e.attribute())};
  } catch (const UnclassifiableError& e) {
    return {422, error_body(e.what())};
  }
}

HttpReply RecommendationHandlers::factors(const std::optional<std::string>& top) const {
  std::optional<std::size_t> n;
  if (top) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(top->data(), top->data() + top->size(), v);
    if (ec != std::errc{} || ptr != top->data() + top->size() || v <= 0) {
      return {400, error_body("top must be a positive integer", "top")};
    }
    n = static_cast<std::size_t>(v);
  }
  return {200, factors_to_json(*model_, n).dump()};
}

struct RecommendationServer::Impl {
  httplib::Server server;
};

RecommendationServer::RecommendationServer(ServiceConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto& svr = impl_->server;
  svr.set_payload_max_length(config_.max_body_bytes);
  svr.set_read_timeout(config_.request_timeout);
  svr.set_write_timeout(config_.request_timeout);

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  auto not_ready = [](httplib::Response& res) {
    res.status = 503;
    res.set_content(error_body("model is loading"), "application/json");
  };

  svr.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    if (ready()) {
      res.set_content("ok", "text/plain");
    } else {
      res.status = 503;
      res.set_content("loading", "text/plain");
    }
  });
  svr.Get("/v1/model", [this, send, not_ready](const httplib::Request&, httplib::Response& res) {
    const auto h = handlers();
    if (!h) return not_ready(res);
    send(res, h->model_info());
  });
  svr.Get("/v1/factors", [this, send, not_ready](const httplib::Request& req, httplib::Response& res) {
    const auto h = handlers();
    if (!h) return not_ready(res);
    std::optional<std::string> top;
    if (req.has_param("top")) top = req.get_param_value("top");
    send(res, h->factors(top));
  });
  svr.Post("/v1/recommendations", [this, send, not_ready](const httplib::Request& req, httplib::Response& res) {
    const auto h = handlers();
    if (!h) return not_ready(res);
    send(res, h->recommend(req.body));
  });
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    const auto& allowed = config_.cors_origins;
    const bool any = std::ranges::find(allowed, "*") != allowed.end();
    if (!any && std::ranges::find(allowed, origin) == allowed.end()) return;
    res.set_header("Access-Control-Allow-Origin", any ? "*" : origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    if (!any) res.set_header("Vary", "Origin");
  });
}

RecommendationServer::~RecommendationServer() { stop(); }

int RecommendationServer::bind() {
  auto& svr = impl_->server;
  if (config_.port == 0) {
    const int port = svr.bind_to_any_port(config_.host);
    if (port <= 0) throw std::runtime_error("cannot bind " + config_.host);
    return port;
  }
  if (!svr.bind_to_port(config_.host, config_.port)) {
    throw std::runtime_error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return config_.port;
}

void RecommendationServer::listen() { impl_->server.listen_after_bind(); }

void RecommendationServer::wait_until_listening() const { impl_->server.wait_until_ready(); }

void RecommendationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void RecommendationServer::install(std::shared_ptr<const RandomWheelModel> model) {
  auto h = std::make_shared<const RecommendationHandlers>(std::move(model));
  std::lock_guard lock(handlers_mutex_);
  handlers_ = std::move(h);
}

std::shared_ptr<const RecommendationHandlers> RecommendationServer::handlers() const {
  std::lock_guard lock(handlers_mutex_);
  return handlers_;
}

namespace {

std::atomic<RecommendationServer*> g_running_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* s = g_running_server.load()) s->stop();
}

}  // namespace

int run_service(const ServiceConfig& config) {
  RecommendationServer server(config);
  int port = 0;
  try {
    port = server.bind();
  } catch (const std::exception& e) {
    std::cerr << "rwheel-serve: " << e.what() << "\n";
    return 1;
  }
  g_running_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  std::thread listener([&server] { server.listen(); });
  std::cerr << "rwheel-serve: listening on " << config.host << ":" << port << ", loading "
            << config.model_path.string() << "\n";

  int status = 0;
  try {
    server.install(std::make_shared<const RandomWheelModel>(read_model_file(config.model_path)));
    std::cerr << "rwheel-serve: model loaded\n";
  } catch (const std::exception& e) {
    std::cerr << "rwheel-serve: failed to load model: " << e.what() << "\n";
    status = 1;
    server.wait_until_listening();
    server.stop();
  }
  listener.join();
  g_running_server = nullptr;
  return status;
}

}  // namespace rwheel
