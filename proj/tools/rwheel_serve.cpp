#include <iostream>

#include "CLI11.hpp"
#include "rwheel/service.hpp"

int main(int argc, char** argv) {
  rwheel::ServiceConfig config;
  std::string model_path;
  long timeout_seconds = config.request_timeout.count();

  CLI::App app{"HTTP service answering recommendations from one random wheel model", "rwheel-serve"};
  app.add_option("--model", model_path, "Model file")->required();
  app.add_option("--host", config.host, "Bind address")->capture_default_str();
  app.add_option("--port", config.port, "Port (0 = any free port)")->capture_default_str();
  app.add_option("--max-body", config.max_body_bytes, "Largest accepted request body in bytes")
      ->capture_default_str();
  app.add_option("--timeout", timeout_seconds, "Read/write timeout in seconds")->capture_default_str();
  app.add_option("--cors", config.cors_origins, "Allowed CORS origin (repeatable, '*' for any)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  config.model_path = model_path;
  config.request_timeout = std::chrono::seconds(timeout_seconds);
  return rwheel::run_service(config);
}
