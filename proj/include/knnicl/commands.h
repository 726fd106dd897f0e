#ifndef KNNICL_COMMANDS_H_
#define KNNICL_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "knnicl/backend.h"
#include "knnicl/dataset.h"
#include "knnicl/evaluation.h"

namespace knnicl {

// Complete experiment definition, parsed from a JSON config file. Flags
// override individual fields after parsing. `methods` and `k_values` span a
// matrix for the evaluate command; predict and sweep-alpha use the first
// method and the first k.
struct RunConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path out_dir = "runs/latest";
  std::uint64_t seed = 1;
  int repetitions = 5;
  double train_fraction = 0.8;
  std::vector<std::string> methods = {"knn_icl"};
  std::vector<int> k_values = {10};
  double alpha = 0.5;
  std::vector<double> alphas = {0.3, 0.4, 0.5, 0.6, 0.7};
  std::string feature_mode = "fused";
  std::string interleave_order = "start_first";
  int concurrency = 1;
  bool dump_rankings = false;
  BackendConfig backend;
  EmbedderConfig embedder;
};

// Strict parse: unknown keys and ill-typed values are validation errors.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

InterleaveOrder interleave_order_from_string(const std::string& name);
BackendKind backend_kind_from_string(const std::string& name);
EmbedderKind embedder_kind_from_string(const std::string& name);

// Optional flag values; set fields replace the config file's.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> backend_kind;
  std::optional<std::filesystem::path> dataset_path;
};

void apply_overrides(RunConfig& config, const CliOverrides& overrides);

struct GenerateOptions {
  SyntheticOptions synthetic;
  std::filesystem::path out_dir = "data";
  std::string format = "csv";  // csv | jsonl
};

// Writes the dataset file, a ground-truth embedding sidecar, and a manifest.
int cmd_generate(const GenerateOptions& options, std::ostream& out);

// Warms the embedding cache over every non-empty description.
int cmd_embed(const RunConfig& config, std::ostream& out);

// Runs the pipeline for one target with its label hidden: shot selection
// against all other labeled records, prediction, and an audit record on
// stdout. `format` is "table" or "json".
int cmd_predict(const RunConfig& config, const std::string& target_id,
                bool show_prompt, const std::string& format,
                std::ostream& out);

// Full methods-by-k matrix; writes report.json, report.txt, audit.jsonl,
// manifest.json (and rankings.jsonl when enabled) under out_dir.
int cmd_evaluate(const RunConfig& config, const std::string& format,
                 std::ostream& out);

// Reruns the first method/k cell once per alpha with shared splits.
int cmd_sweep_alpha(const RunConfig& config, const std::string& format,
                    std::ostream& out);

// Maps exceptions to exit codes: 0 success, 2 invalid configuration or
// input, 1 runtime failure.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace knnicl

#endif  // KNNICL_COMMANDS_H_
