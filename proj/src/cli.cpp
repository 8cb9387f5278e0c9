#include "rwheel/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "rwheel/error.hpp"
#include "rwheel/eval.hpp"
#include "rwheel/explain.hpp"
#include "rwheel/model_io.hpp"
#include "rwheel/service.hpp"

namespace rwheel {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Usage problem detected after CLI11 parsing (missing file, bad flag value).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string data_path;
  std::string schema_path;
  std::string model_path;
  std::string out_path;
  std::string values;
  std::string input_path;
  std::string confidence_out;
  std::string format = "text";
  WheelConfig wheel;
  std::size_t k = 10;
  std::size_t top = 3;
  std::size_t workers = 0;
};

std::string read_required(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
  return read_text_file(path);
}

Dataset load_dataset(const CliConfig& cfg) {
  const auto text = read_required(cfg.data_path, "data");
  if (cfg.schema_path.empty()) return parse_dataset(text, infer_schema(text));
  const auto schema = parse_schema(read_required(cfg.schema_path, "schema"));
  return parse_dataset(text, schema);
}

RandomWheelModel load_model_file(const std::string& path) {
  return load_model(read_required(path, "model"));
}

Observation parse_observation(std::string_view line, const Dataset& dataset) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != dataset.attribute_count()) {
    throw SchemaError("observation has " + std::to_string(fields.size()) + " values, model expects " +
                      std::to_string(dataset.attribute_count()));
  }
  Observation obs;
  for (std::size_t a = 0; a < fields.size(); ++a) {
    try {
      obs.push_back(parse_value(fields[a], dataset.schema()[a].kind));
    } catch (const ParseError& e) {
      throw SchemaError(dataset.schema()[a].name + ": " + e.what(), dataset.schema()[a].name);
    }
  }
  return obs;
}

std::vector<Observation> collect_observations(const CliConfig& cfg, const Dataset& dataset) {
  std::vector<Observation> out;
  if (!cfg.values.empty()) out.push_back(parse_observation(cfg.values, dataset));
  if (!cfg.input_path.empty()) {
    const auto text = read_required(cfg.input_path, "input");
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      auto line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (line.empty()) continue;
      out.push_back(parse_observation(line, dataset));
    }
  }
  if (out.empty()) throw UsageError("give an observation with --values or --input");
  return out;
}

int cmd_train(const CliConfig& cfg, std::ostream& out) {
  cfg.wheel.validate();
  const auto dataset = load_dataset(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto model = train(dataset, cfg.wheel, cfg.workers);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  write_model_file(model, cfg.out_path);

  const auto& table = model.factor_table();
  if (cfg.format == "json") {
    out << json{{"model", cfg.out_path},
                {"factors", table.scores.size()},
                {"discarded", table.discarded_count},
                {"elapsed_seconds", elapsed.count()}}
               .dump()
        << "\n";
  } else {
    char buf[160];
    std::snprintf(buf, sizeof buf, "Trained on %zu records: %zu factors kept, %zu discarded, %.2fs\n",
                  dataset.size(), table.scores.size(), table.discarded_count, elapsed.count());
    out << buf << "Model written to " << cfg.out_path << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const CliConfig& cfg, std::ostream& out) {
  cfg.wheel.validate();
  if (cfg.k < 2) throw UsageError("--k must be at least 2");
  const auto dataset = load_dataset(cfg);
  const auto result = cross_validate(dataset, cfg.wheel, cfg.k, cfg.wheel.seed, cfg.workers);
  if (!cfg.confidence_out.empty()) write_confidence_csvs(result.confidence, cfg.confidence_out);

  if (cfg.format == "json") {
    out << to_json(result, dataset.class_tokens()).dump() << "\n";
  } else {
    out << cfg.k << "-fold stratified cross-validation over " << dataset.size() << " records\n\n"
        << format_metrics_table(result, dataset.class_tokens());
    if (!cfg.confidence_out.empty()) out << "\nConfidence files written to " << cfg.confidence_out << "\n";
  }
  return kExitOk;
}

int cmd_recommend(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = load_model_file(cfg.model_path);
  const auto& dataset = model.dataset();
  const auto observations = collect_observations(cfg, dataset);
  const auto version = model_version(model);
  const bool binary_credit = dataset.class_index("+") && dataset.class_index("-") && dataset.class_count() == 2;

  int status = kExitOk;
  json batch = json::array();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    try {
      const auto rec = recommend(model, observations[i]);
      const auto report = aggregate_explanation(rec, dataset.schema());
      if (cfg.format == "json") {
        batch.push_back(recommendation_to_json(model, rec, report, version));
        continue;
      }
      std::string verdict = rec.label;
      if (binary_credit) verdict += rec.winner == approval_class(dataset) ? " (approve)" : " (reject)";
      char conf[32];
      std::snprintf(conf, sizeof conf, "%.1f%%", 100 * rec.confidence);
      out << "Recommendation: " << verdict << ", Confidence: " << conf
          << ", Top factors: " << format_top_attributions(report, cfg.top) << "\n";
    } catch (const UnclassifiableError& e) {
      err << "observation " << i + 1 << ": unclassifiable (" << e.what() << ")\n";
      if (cfg.format == "json") batch.push_back(json{{"error", "unclassifiable"}});
      else out << "Recommendation: unclassifiable\n";
      status = kExitDomain;
    }
  }
  if (cfg.format == "json") out << json{{"recommendations", std::move(batch)}}.dump() << "\n";
  return status;
}

int cmd_factors(const CliConfig& cfg, bool top_given, std::ostream& out) {
  const auto model = load_model_file(cfg.model_path);
  const std::optional<std::size_t> top = top_given ? std::optional(cfg.top) : std::nullopt;
  if (top && *top == 0) throw UsageError("--top must be at least 1");
  if (cfg.format == "json") {
    out << factors_to_json(model, top).dump() << "\n";
    return kExitOk;
  }
  const auto& scores = model.factor_table().scores;
  const std::size_t n = top ? std::min(*top, scores.size()) : scores.size();
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%-24s %.6f\n", scores[i].factor.label(model.dataset().schema()).c_str(),
                  scores[i].importance);
    out << buf;
  }
  return kExitOk;
}

void add_wheel_options(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--depth", cfg.wheel.depth, "Largest attribute combination per factor")->capture_default_str();
  cmd->add_option("--noise-fraction", cfg.wheel.noise_fraction, "Upper bound on the factor slice a trial may draw")
      ->capture_default_str();
  cmd->add_option("--trials", cfg.wheel.trials, "Trials per recommendation")->capture_default_str();
  cmd->add_option("--shuffles", cfg.wheel.importance_shuffles, "Shuffle budget per factor importance")
      ->capture_default_str();
  cmd->add_option("--window", cfg.wheel.neighbor_window, "Neighbor band half-width in standard deviations")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.wheel.seed, "Random seed (falls back to RW_SEED)")->envname("RW_SEED")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.workers, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_data_options(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--data", cfg.data_path, "Comma-separated records, '?' for missing")->required();
  cmd->add_option("--schema", cfg.schema_path, "Schema sidecar (name,kind per line); inferred when omitted");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random wheel classifier: train, evaluate, recommend and inspect factors", "rwheel"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto* train_cmd = app.add_subcommand("train", "Build a model file from a dataset");
  add_data_options(train_cmd, cfg);
  add_wheel_options(train_cmd, cfg);
  train_cmd->add_option("--out", cfg.out_path, "Model file to write")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  add_data_options(eval_cmd, cfg);
  add_wheel_options(eval_cmd, cfg);
  eval_cmd->add_option("--k", cfg.k, "Number of folds")->capture_default_str();
  eval_cmd->add_option("--confidence-out", cfg.confidence_out, "Directory for correct.csv and wrong.csv");

  auto* rec_cmd = app.add_subcommand("recommend", "Recommend and explain observations");
  rec_cmd->add_option("--model", cfg.model_path, "Model file")->required();
  rec_cmd->add_option("--values", cfg.values, "One observation: comma-separated values, '?' for missing");
  rec_cmd->add_option("--input", cfg.input_path, "File with one observation per line");
  rec_cmd->add_option("--top", cfg.top, "Attributes listed before 'others'")->capture_default_str();

  auto* factors_cmd = app.add_subcommand("factors", "List the ranked factor table");
  factors_cmd->add_option("--model", cfg.model_path, "Model file")->required();
  auto* factors_top = factors_cmd->add_option("--top", cfg.top, "Only the N most important factors");

  for (auto* cmd : {train_cmd, eval_cmd, rec_cmd, factors_cmd}) {
    cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "rwheel: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(cfg, out);
    if (eval_cmd->parsed()) return cmd_evaluate(cfg, out);
    if (rec_cmd->parsed()) return cmd_recommend(cfg, out, err);
    if (factors_cmd->parsed()) return cmd_factors(cfg, factors_top->count() > 0, out);
  } catch (const UsageError& e) {
    err << "rwheel: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "rwheel: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "rwheel: parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "rwheel: observation does not match the model schema: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelFormatError& e) {
    err << "rwheel: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnclassifiableError& e) {
    err << "rwheel: unclassifiable: " << e.what() << "\n";
    return kExitDomain;
  } catch (const DomainError& e) {
    err << "rwheel: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "rwheel: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace rwheel
