#include "knnicl/commands.h"

#include <fstream>
#include <set>

#include "knnicl/digest.h"
#include "knnicl/features.h"
#include "knnicl/report.h"
#include "knnicl/rng.h"

namespace knnicl {
namespace {

void check_known_keys(const nlohmann::json& object,
                      const std::set<std::string>& allowed,
                      const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (allowed.count(key) == 0) {
      throw ValidationError("unknown " + where + " key \"" + key + "\"");
    }
  }
}

template <typename T>
T field_as(const nlohmann::json& object, const std::string& key,
           const T& fallback) {
  auto it = object.find(key);
  if (it == object.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config key \"" + key + "\": " + e.what());
  }
}

RetryPolicy parse_retry(const nlohmann::json& object) {
  check_known_keys(object, {"max_attempts", "base_delay_ms", "multiplier"},
                   "retry");
  RetryPolicy policy;
  policy.max_attempts = field_as<int>(object, "max_attempts",
                                      policy.max_attempts);
  policy.base_delay = std::chrono::milliseconds(field_as<std::int64_t>(
      object, "base_delay_ms", policy.base_delay.count()));
  policy.multiplier = field_as<double>(object, "multiplier",
                                       policy.multiplier);
  return policy;
}

BackendConfig parse_backend(const nlohmann::json& object) {
  check_known_keys(object,
                   {"kind", "endpoint", "model_id", "temperature",
                    "max_concurrent", "retry", "fixed_response",
                    "credential_env"},
                   "backend");
  BackendConfig config;
  config.kind = backend_kind_from_string(
      field_as<std::string>(object, "kind", "nearest_shot_oracle"));
  config.endpoint = field_as<std::string>(object, "endpoint", "");
  config.model_id = field_as<std::string>(object, "model_id", "");
  config.temperature =
      field_as<double>(object, "temperature", config.temperature);
  config.max_concurrent =
      field_as<int>(object, "max_concurrent", config.max_concurrent);
  if (object.contains("retry")) config.retry = parse_retry(object.at("retry"));
  config.fixed_response =
      field_as<std::string>(object, "fixed_response", config.fixed_response);
  config.credential_env =
      field_as<std::string>(object, "credential_env", config.credential_env);
  return config;
}

EmbedderConfig parse_embedder(const nlohmann::json& object) {
  check_known_keys(object,
                   {"kind", "endpoint", "model_id", "hash_dim", "lru_capacity",
                    "cache_path", "retry", "credential_env"},
                   "embedder");
  EmbedderConfig config;
  config.kind = embedder_kind_from_string(
      field_as<std::string>(object, "kind", "coordinate"));
  config.endpoint = field_as<std::string>(object, "endpoint", "");
  config.model_id = field_as<std::string>(object, "model_id", "");
  config.hash_dim = field_as<std::size_t>(object, "hash_dim", config.hash_dim);
  config.lru_capacity =
      field_as<std::size_t>(object, "lru_capacity", config.lru_capacity);
  const std::string cache =
      field_as<std::string>(object, "cache_path", "");
  if (!cache.empty()) config.cache_path = cache;
  if (object.contains("retry")) config.retry = parse_retry(object.at("retry"));
  config.credential_env =
      field_as<std::string>(object, "credential_env", config.credential_env);
  return config;
}

nlohmann::json retry_to_json(const RetryPolicy& policy) {
  return nlohmann::json{{"max_attempts", policy.max_attempts},
                        {"base_delay_ms", policy.base_delay.count()},
                        {"multiplier", policy.multiplier}};
}

std::string backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kRemote:
      return "remote";
    case BackendKind::kNearestShotOracle:
      return "nearest_shot_oracle";
    case BackendKind::kMajorityOracle:
      return "majority_oracle";
    case BackendKind::kFixedResponse:
      return "fixed_response";
  }
  throw ValidationError("unknown backend kind");
}

std::string embedder_kind_name(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::kRemote:
      return "remote";
    case EmbedderKind::kHashing:
      return "hashing";
    case EmbedderKind::kCoordinate:
      return "coordinate";
  }
  throw ValidationError("unknown embedder kind");
}

void check_format(const std::string& format) {
  if (format != "table" && format != "json") {
    throw ValidationError("format must be \"table\" or \"json\", got \"" +
                          format + "\"");
  }
}

ExperimentConfig make_experiment_config(const RunConfig& config,
                                        const std::string& method, int k) {
  ExperimentConfig experiment;
  experiment.method = method_from_string(method);
  experiment.k = k;
  experiment.alpha = config.alpha;
  experiment.feature_mode = feature_mode_from_string(config.feature_mode);
  experiment.repetitions = config.repetitions;
  experiment.train_fraction = config.train_fraction;
  experiment.seed = config.seed;
  experiment.interleave_order =
      interleave_order_from_string(config.interleave_order);
  experiment.concurrency = config.concurrency;
  experiment.dump_rankings = config.dump_rankings;
  return experiment;
}

bool any_needs_backend(const std::vector<std::string>& methods) {
  for (const std::string& m : methods) {
    if (method_from_string(m) != Method::kLogReg) return true;
  }
  return false;
}

bool any_needs_embeddings(const std::vector<std::string>& methods,
                          FeatureMode mode) {
  if (mode == FeatureMode::kStructuredOnly) return false;
  for (const std::string& m : methods) {
    if (method_from_string(m) != Method::kZeroShot) return true;
  }
  return false;
}

Dataset load_input_dataset(const RunConfig& config) {
  if (config.dataset_path.empty()) {
    throw ValidationError("config needs a dataset path");
  }
  return load_dataset(config.dataset_path,
                      format_from_path(config.dataset_path));
}

}  // namespace

InterleaveOrder interleave_order_from_string(const std::string& name) {
  if (name == "start_first") return InterleaveOrder::kStartFirst;
  if (name == "start_last") return InterleaveOrder::kStartLast;
  throw ValidationError("unknown interleave order \"" + name +
                        "\" (expected start_first or start_last)");
}

BackendKind backend_kind_from_string(const std::string& name) {
  if (name == "remote") return BackendKind::kRemote;
  if (name == "nearest_shot_oracle") return BackendKind::kNearestShotOracle;
  if (name == "majority_oracle") return BackendKind::kMajorityOracle;
  if (name == "fixed_response") return BackendKind::kFixedResponse;
  throw ValidationError("unknown backend kind \"" + name +
                        "\" (expected remote, nearest_shot_oracle, "
                        "majority_oracle, or fixed_response)");
}

EmbedderKind embedder_kind_from_string(const std::string& name) {
  if (name == "remote") return EmbedderKind::kRemote;
  if (name == "hashing") return EmbedderKind::kHashing;
  if (name == "coordinate") return EmbedderKind::kCoordinate;
  throw ValidationError("unknown embedder kind \"" + name +
                        "\" (expected remote, hashing, or coordinate)");
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("config root must be a JSON object");
  }
  check_known_keys(doc,
                   {"dataset", "out_dir", "seed", "repetitions",
                    "train_fraction", "methods", "k_values", "alpha", "alphas",
                    "feature_mode", "interleave_order", "concurrency",
                    "dump_rankings", "backend", "embedder"},
                   "config");
  RunConfig config;
  config.dataset_path = field_as<std::string>(doc, "dataset", "");
  config.out_dir =
      field_as<std::string>(doc, "out_dir", config.out_dir.string());
  config.seed = field_as<std::uint64_t>(doc, "seed", config.seed);
  config.repetitions =
      field_as<int>(doc, "repetitions", config.repetitions);
  config.train_fraction =
      field_as<double>(doc, "train_fraction", config.train_fraction);
  config.methods =
      field_as<std::vector<std::string>>(doc, "methods", config.methods);
  config.k_values = field_as<std::vector<int>>(doc, "k_values",
                                               config.k_values);
  config.alpha = field_as<double>(doc, "alpha", config.alpha);
  config.alphas = field_as<std::vector<double>>(doc, "alphas", config.alphas);
  config.feature_mode =
      field_as<std::string>(doc, "feature_mode", config.feature_mode);
  config.interleave_order = field_as<std::string>(doc, "interleave_order",
                                                  config.interleave_order);
  config.concurrency = field_as<int>(doc, "concurrency", config.concurrency);
  config.dump_rankings =
      field_as<bool>(doc, "dump_rankings", config.dump_rankings);
  if (doc.contains("backend")) config.backend = parse_backend(doc.at("backend"));
  if (doc.contains("embedder")) {
    config.embedder = parse_embedder(doc.at("embedder"));
  }
  if (config.methods.empty()) {
    throw ValidationError("config needs at least one method");
  }
  if (config.k_values.empty()) {
    throw ValidationError("config needs at least one k value");
  }
  // Validate names eagerly so a bad config fails before any work.
  for (const std::string& m : config.methods) method_from_string(m);
  feature_mode_from_string(config.feature_mode);
  interleave_order_from_string(config.interleave_order);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config \"" + path.string() + "\"");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config \"" + path.string() +
                          "\" is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json backend{
      {"kind", backend_kind_name(config.backend.kind)},
      {"endpoint", config.backend.endpoint},
      {"model_id", config.backend.model_id},
      {"temperature", config.backend.temperature},
      {"max_concurrent", config.backend.max_concurrent},
      {"retry", retry_to_json(config.backend.retry)},
      {"fixed_response", config.backend.fixed_response},
      {"credential_env", config.backend.credential_env}};
  nlohmann::json embedder{
      {"kind", embedder_kind_name(config.embedder.kind)},
      {"endpoint", config.embedder.endpoint},
      {"model_id", config.embedder.model_id},
      {"hash_dim", config.embedder.hash_dim},
      {"lru_capacity", config.embedder.lru_capacity},
      {"cache_path", config.embedder.cache_path.has_value()
                         ? nlohmann::json(config.embedder.cache_path->string())
                         : nlohmann::json(nullptr)},
      {"retry", retry_to_json(config.embedder.retry)},
      {"credential_env", config.embedder.credential_env}};
  return nlohmann::json{{"dataset", config.dataset_path.string()},
                        {"out_dir", config.out_dir.string()},
                        {"seed", config.seed},
                        {"repetitions", config.repetitions},
                        {"train_fraction", config.train_fraction},
                        {"methods", config.methods},
                        {"k_values", config.k_values},
                        {"alpha", config.alpha},
                        {"alphas", config.alphas},
                        {"feature_mode", config.feature_mode},
                        {"interleave_order", config.interleave_order},
                        {"concurrency", config.concurrency},
                        {"dump_rankings", config.dump_rankings},
                        {"backend", std::move(backend)},
                        {"embedder", std::move(embedder)}};
}

void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
  if (overrides.seed.has_value()) config.seed = *overrides.seed;
  if (overrides.out_dir.has_value()) config.out_dir = *overrides.out_dir;
  if (overrides.backend_kind.has_value()) {
    config.backend.kind = backend_kind_from_string(*overrides.backend_kind);
  }
  if (overrides.dataset_path.has_value()) {
    config.dataset_path = *overrides.dataset_path;
  }
}

int cmd_generate(const GenerateOptions& options, std::ostream& out) {
  if (options.format != "csv" && options.format != "jsonl") {
    throw ValidationError("format must be \"csv\" or \"jsonl\", got \"" +
                          options.format + "\"");
  }
  SyntheticData data = generate_synthetic(options.synthetic);
  std::filesystem::create_directories(options.out_dir);

  const std::filesystem::path dataset_path =
      options.out_dir / ("startups." + options.format);
  save_dataset(data.dataset, dataset_path, format_from_path(dataset_path));

  const std::filesystem::path sidecar_path =
      options.out_dir / "embeddings.jsonl";
  {
    std::ofstream sidecar(sidecar_path, std::ios::binary | std::ios::trunc);
    if (!sidecar) {
      throw RuntimeFailure("cannot open \"" + sidecar_path.string() +
                           "\" for writing");
    }
    sidecar << nlohmann::json{{"dim", options.synthetic.embed_dim},
                              {"kind", "synthetic_text_coordinates"}}
                   .dump()
            << '\n';
    // Dataset order, so the sidecar is deterministic alongside the file.
    for (const StartupRecord& record : data.dataset.records()) {
      sidecar << nlohmann::json{{"id", record.id},
                                {"values", data.embeddings.at(record.id)}}
                     .dump()
              << '\n';
    }
    if (!sidecar) {
      throw RuntimeFailure("failed writing \"" + sidecar_path.string() + "\"");
    }
  }

  const std::string digest = "sha256:" + sha256_file_hex(dataset_path);
  nlohmann::json snapshot{{"command", "generate"},
                          {"n", options.synthetic.n},
                          {"embed_dim", options.synthetic.embed_dim},
                          {"separation", options.synthetic.separation},
                          {"positive_fraction",
                           options.synthetic.positive_fraction},
                          {"format", options.format}};
  write_json_file(options.out_dir / "manifest.json",
                  make_manifest(snapshot, digest, options.synthetic.seed,
                                "none", "none"));

  const DatasetStats stats = describe(data.dataset);
  out << "Wrote " << stats.n << " records to " << dataset_path.string() << " ("
      << stats.positives << " positives, " << stats.labeled << " labeled)\n"
      << "Embedding sidecar: " << sidecar_path.string() << "\n"
      << "Dataset digest: " << digest << "\n";
  return 0;
}

int cmd_embed(const RunConfig& config, std::ostream& out) {
  const Dataset dataset = load_input_dataset(config);
  EmbedderConfig embedder_config = config.embedder;
  if (!embedder_config.cache_path.has_value()) {
    embedder_config.cache_path = config.out_dir / "embeddings.cache";
  }
  std::shared_ptr<Embedder> embedder =
      make_embedder(embedder_config, config.seed);

  std::size_t embedded = 0;
  std::size_t skipped = 0;
  std::size_t dim = 0;
  for (const StartupRecord& record : dataset.records()) {
    if (record.description.empty()) {
      ++skipped;
      continue;
    }
    dim = embedder->embed(record.description).dim();
    ++embedded;
  }

  auto* caching = dynamic_cast<CachingEmbedder*>(embedder.get());
  EmbedderStats stats;
  if (caching != nullptr) {
    stats = caching->stats();
    caching->flush();
  }

  const std::string digest =
      "sha256:" + sha256_file_hex(config.dataset_path);
  write_json_file(config.out_dir / "manifest.json",
                  make_manifest(run_config_to_json(config), digest,
                                config.seed, "none", embedder->id()));

  out << "Embedded " << embedded << " descriptions (dim " << dim << ", "
      << skipped << " empty skipped)\n"
      << "Cache " << embedder_config.cache_path->string() << ": computed "
      << stats.computed << ", memory hits " << stats.memory_hits
      << ", disk hits " << stats.disk_hits << "\n";
  return 0;
}

int cmd_predict(const RunConfig& config, const std::string& target_id,
                bool show_prompt, const std::string& format,
                std::ostream& out) {
  check_format(format);
  const Dataset dataset = load_input_dataset(config);
  const StartupRecord* target = dataset.find(target_id);
  if (target == nullptr) {
    throw ValidationError("unknown target id \"" + target_id + "\"");
  }

  const std::string method_name = config.methods.front();
  const Method method = method_from_string(method_name);
  const FeatureMode mode = feature_mode_from_string(config.feature_mode);
  const int k = config.k_values.front();
  const bool needs_embeddings =
      method != Method::kZeroShot && mode != FeatureMode::kStructuredOnly;
  const bool needs_structured =
      method != Method::kZeroShot && mode != FeatureMode::kTextOnly;

  // Candidate pool: every labeled record except the target; its own label
  // stays hidden from the pipeline.
  std::vector<const StartupRecord*> pool;
  for (const StartupRecord& record : dataset.records()) {
    if (!record.labeled() || record.id == target_id) continue;
    if (needs_embeddings && record.description.empty()) continue;
    pool.push_back(&record);
  }
  if (needs_embeddings && target->description.empty()) {
    throw ValidationError("target \"" + target_id +
                          "\" has an empty description; text retrieval needs "
                          "one (or use feature_mode structured_only)");
  }

  SupportSet support;
  support.target_id = target_id;
  support.k = 0;
  LogRegModel model;
  double logreg_value = 0.0;

  std::shared_ptr<Embedder> embedder;
  if (needs_embeddings) embedder = make_embedder(config.embedder, config.seed);

  FusedTable table;
  if (method != Method::kZeroShot) {
    ScalerParams scaler;
    if (needs_structured) scaler = fit_scaler(pool);
    auto fuse_record = [&](const StartupRecord& record) {
      std::vector<double> structured;
      if (needs_structured) structured = apply_scaler(scaler, record);
      if (!needs_embeddings) return fused_structured_only(structured);
      Embedding embedding = embedder->embed(record.description);
      if (!needs_structured) return fused_text_only(embedding);
      return fuse(structured, embedding, config.alpha);
    };
    LabelMap labels;
    for (const StartupRecord* record : pool) {
      table.emplace(record->id, fuse_record(*record));
      labels.emplace(record->id, *record->outcome);
    }
    const FusedVector target_vector = fuse_record(*target);

    switch (method) {
      case Method::kKnnIcl:
      case Method::kLogReg:
        support = retrieve_support_set(
            target_id, target_vector, table, labels, k,
            derive_seed(config.seed, "retrieval", 0, target_id),
            interleave_order_from_string(config.interleave_order));
        break;
      case Method::kVanillaIcl:
        table.emplace(target_id, target_vector);
        support = select_random_shots(
            target_id, table, labels, k,
            derive_seed(config.seed, "sampling", 0, target_id));
        break;
      case Method::kSectorIcl:
        table.emplace(target_id, target_vector);
        support = select_sector_shots(
            *target, dataset, table, labels, k,
            derive_seed(config.seed, "sampling", 0, target_id));
        break;
      case Method::kZeroShot:
        break;
    }
    if (method == Method::kLogReg) {
      std::vector<LabeledVector> examples;
      for (const Shot& shot : support.shots) {
        examples.push_back(
            LabeledVector{shot.id, table.at(shot.id).values, shot.outcome});
      }
      model = train_logreg(examples, TrainOptions{});
      logreg_value = logreg_decision(model, target_vector.values);
    }
  }

  Outcome decoded = Outcome::kFailure;
  std::string raw_response;
  DecodeStatus status = DecodeStatus::kClean;
  std::string prompt_text;

  if (method == Method::kLogReg) {
    decoded = logreg_value >= 0.0 ? Outcome::kSuccess : Outcome::kFailure;
    raw_response = format_double(logreg_value);
  } else {
    std::shared_ptr<CompletionBackend> backend =
        make_backend(config.backend, config.seed);
    PromptBundle bundle = render_prompt(dataset, support, *target,
                                        method == Method::kZeroShot
                                            ? PromptMode::kZeroShot
                                            : PromptMode::kFewShot);
    prompt_text = bundle.rendered_text;
    raw_response = backend->complete(bundle);
    Prediction prediction = decode_response(raw_response);
    if (prediction.status == DecodeStatus::kError) {
      raw_response = backend->complete(bundle);
      prediction = decode_response(raw_response);
    }
    if (prediction.status == DecodeStatus::kError) {
      throw RuntimeFailure("backend response undecodable after retry: \"" +
                           raw_response + "\"");
    }
    decoded = *prediction.label;
    status = prediction.status;
  }

  if (format == "json") {
    nlohmann::json shots = nlohmann::json::array();
    for (const Shot& shot : support.shots) {
      shots.push_back(nlohmann::json{{"id", shot.id},
                                     {"outcome", to_string(shot.outcome)},
                                     {"score", shot.score}});
    }
    nlohmann::json record{{"target_id", target_id},
                          {"method", method_name},
                          {"k", support.k},
                          {"decoded", to_string(decoded)},
                          {"raw_response", raw_response},
                          {"status", decode_status_name(status)},
                          {"shots", std::move(shots)}};
    if (show_prompt) record["prompt"] = prompt_text;
    out << record.dump(2) << '\n';
    return 0;
  }

  out << "Prediction for \"" << target_id << "\": " << to_string(decoded)
      << '\n';
  out << "Method " << method_name << ", feature mode " << config.feature_mode;
  if (method != Method::kZeroShot) out << ", k=" << k;
  out << '\n';
  if (!support.shots.empty()) {
    std::size_t rank = 1;
    out << "Shots (prompt order):\n";
    for (const Shot& shot : support.shots) {
      out << "  " << rank++ << ". " << shot.id << "  "
          << to_string(shot.outcome) << "  score "
          << format_fixed(shot.score, 4) << '\n';
    }
  }
  out << "Raw response: \"" << raw_response << "\" ("
      << decode_status_name(status) << ")\n";
  if (show_prompt && !prompt_text.empty()) {
    out << "\n--- prompt ---\n" << prompt_text << "\n--- end prompt ---\n";
  }
  return 0;
}

int cmd_evaluate(const RunConfig& config, const std::string& format,
                 std::ostream& out) {
  check_format(format);
  const Dataset dataset = load_input_dataset(config);
  const std::string digest =
      "sha256:" + sha256_file_hex(config.dataset_path);
  const FeatureMode mode = feature_mode_from_string(config.feature_mode);

  std::shared_ptr<CompletionBackend> backend;
  if (any_needs_backend(config.methods)) {
    backend = make_backend(config.backend, config.seed);
  }
  std::shared_ptr<Embedder> embedder;
  if (any_needs_embeddings(config.methods, mode)) {
    embedder = make_embedder(config.embedder, config.seed);
  }

  std::vector<ReportRow> rows;
  for (const std::string& method_name : config.methods) {
    const bool zero_shot =
        method_from_string(method_name) == Method::kZeroShot;
    // Zero-shot ignores k; one run stands in for the whole k row.
    const std::vector<int> ks =
        zero_shot ? std::vector<int>{config.k_values.front()}
                  : config.k_values;
    for (int k : ks) {
      ExperimentConfig experiment =
          make_experiment_config(config, method_name, k);
      ReportRow row;
      row.method = method_name;
      row.feature_mode = config.feature_mode;
      row.k = zero_shot ? 0 : k;
      row.alpha = config.alpha;
      row.report = run_experiment(experiment, dataset, backend.get(),
                                  embedder.get());
      rows.push_back(std::move(row));
    }
  }

  const nlohmann::json report = report_to_json(rows);
  const std::string text = render_report_text(rows);
  write_json_file(config.out_dir / "report.json", report);
  write_text_file(config.out_dir / "report.txt", text);
  write_audit_log(config.out_dir / "audit.jsonl", rows);
  if (config.dump_rankings) {
    write_ranking_log(config.out_dir / "rankings.jsonl", rows);
  }
  write_json_file(
      config.out_dir / "manifest.json",
      make_manifest(run_config_to_json(config), digest, config.seed,
                    backend != nullptr ? backend->id() : "none",
                    embedder != nullptr ? embedder->id() : "none"));

  if (format == "json") {
    out << report.dump(2) << '\n';
  } else {
    out << text << "\nWrote report.json, report.txt, audit.jsonl"
        << (config.dump_rankings ? ", rankings.jsonl" : "")
        << ", manifest.json to " << config.out_dir.string() << '\n';
  }
  return 0;
}

int cmd_sweep_alpha(const RunConfig& config, const std::string& format,
                    std::ostream& out) {
  check_format(format);
  const std::string method_name = config.methods.front();
  const Method method = method_from_string(method_name);
  if (method == Method::kZeroShot) {
    throw ValidationError("alpha sweep needs a retrieval method");
  }
  const Dataset dataset = load_input_dataset(config);
  const std::string digest =
      "sha256:" + sha256_file_hex(config.dataset_path);

  std::shared_ptr<CompletionBackend> backend;
  if (method != Method::kLogReg) {
    backend = make_backend(config.backend, config.seed);
  }
  std::shared_ptr<Embedder> embedder =
      make_embedder(config.embedder, config.seed);

  ExperimentConfig base =
      make_experiment_config(config, method_name, config.k_values.front());
  std::vector<std::pair<double, MetricsReport>> results = alpha_sweep(
      base, dataset, backend.get(), embedder.get(), config.alphas);

  std::vector<ReportRow> rows;
  rows.reserve(results.size());
  for (auto& [alpha, report] : results) {
    ReportRow row;
    row.method = method_name;
    row.feature_mode = config.feature_mode;
    row.k = base.k;
    row.alpha = alpha;
    row.report = std::move(report);
    rows.push_back(std::move(row));
  }

  const nlohmann::json report = report_to_json(rows);
  const std::string text = render_report_text(rows);
  write_json_file(config.out_dir / "sweep.json", report);
  write_text_file(config.out_dir / "sweep.txt", text);
  write_json_file(
      config.out_dir / "manifest.json",
      make_manifest(run_config_to_json(config), digest, config.seed,
                    backend != nullptr ? backend->id() : "none",
                    embedder->id()));

  if (format == "json") {
    out << report.dump(2) << '\n';
  } else {
    out << text << "\nWrote sweep.json, sweep.txt, manifest.json to "
        << config.out_dir.string() << '\n';
  }
  return 0;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const RuntimeFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace knnicl
