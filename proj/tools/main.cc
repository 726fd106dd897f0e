#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "knnicl/commands.h"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> backend_kind;
  std::optional<std::string> dataset;
  std::string format = "table";
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment config")
      ->required();
  cmd->add_option("--seed", flags.seed, "Root seed (overrides config)");
  cmd->add_option("--out", flags.out_dir, "Output directory (overrides config)");
  cmd->add_option("--backend", flags.backend_kind,
                  "Backend kind: remote, nearest_shot_oracle, majority_oracle, "
                  "fixed_response (overrides config)");
  cmd->add_option("--dataset", flags.dataset,
                  "Dataset path (overrides config)");
  cmd->add_option("--format", flags.format, "Output format: table or json")
      ->check(CLI::IsMember({"table", "json"}));
}

knnicl::RunConfig resolve_config(const CommonFlags& flags) {
  knnicl::RunConfig config = knnicl::load_run_config(flags.config_path);
  knnicl::CliOverrides overrides;
  overrides.seed = flags.seed;
  if (flags.out_dir.has_value()) overrides.out_dir = *flags.out_dir;
  overrides.backend_kind = flags.backend_kind;
  if (flags.dataset.has_value()) overrides.dataset_path = *flags.dataset;
  knnicl::apply_overrides(config, overrides);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Startup outcome prediction with retrieval-based in-context learning"};
  app.require_subcommand(1);

  knnicl::GenerateOptions generate_options;
  CLI::App* generate =
      app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("--n", generate_options.synthetic.n,
                       "Record count (minimum 4)");
  generate->add_option("--dim", generate_options.synthetic.embed_dim,
                       "Text coordinate dimension");
  generate->add_option("--separation", generate_options.synthetic.separation,
                       "Distance between class cluster centers");
  generate->add_option("--positive-fraction",
                       generate_options.synthetic.positive_fraction,
                       "Share of positive labels");
  generate->add_option("--seed", generate_options.synthetic.seed, "Root seed");
  generate->add_option("--out", generate_options.out_dir, "Output directory");
  generate->add_option("--format", generate_options.format,
                       "Dataset format: csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  CommonFlags embed_flags;
  CLI::App* embed =
      app.add_subcommand("embed", "Precompute and cache text embeddings");
  add_common_flags(embed, embed_flags);

  CommonFlags predict_flags;
  std::string target_id;
  bool show_prompt = false;
  CLI::App* predict =
      app.add_subcommand("predict", "Predict one target's outcome");
  add_common_flags(predict, predict_flags);
  predict->add_option("--target", target_id, "Target record id")->required();
  predict->add_flag("--show-prompt", show_prompt,
                    "Print the rendered prompt");

  CommonFlags evaluate_flags;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Run the configured methods-by-k experiment matrix");
  add_common_flags(evaluate, evaluate_flags);

  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand(
      "sweep-alpha", "Rerun one configuration across the alpha grid");
  add_common_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return knnicl::run_guarded(
      [&]() -> int {
        if (*generate) return knnicl::cmd_generate(generate_options, std::cout);
        if (*embed) {
          return knnicl::cmd_embed(resolve_config(embed_flags), std::cout);
        }
        if (*predict) {
          return knnicl::cmd_predict(resolve_config(predict_flags), target_id,
                                     show_prompt, predict_flags.format,
                                     std::cout);
        }
        if (*evaluate) {
          return knnicl::cmd_evaluate(resolve_config(evaluate_flags),
                                      evaluate_flags.format, std::cout);
        }
        if (*sweep) {
          return knnicl::cmd_sweep_alpha(resolve_config(sweep_flags),
                                         sweep_flags.format, std::cout);
        }
        return 2;
      },
      std::cerr);
}
