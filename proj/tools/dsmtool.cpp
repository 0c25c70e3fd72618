// dsmtool: command-line front end for the pipeline stages.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsm/error.hpp"
#include "dsm/harness.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags* flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags->config,
                              "pipeline configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", flags->out,
                  "output directory (overrides output_dir)");
  cmd->add_option("--seed", flags->seed,
                  "seed for synthesis, splitting and training");
}

dsm::PipelineConfig resolve(const CommonFlags& flags) {
  dsm::PipelineConfig c;
  if (!flags.config.empty()) {
    try {
      c = dsm::load_config(flags.config);
    } catch (...) {
      dsm::rethrow_with_stage("config");
    }
  } else {
    c.use_synth = true;
    c.variants = dsm::default_variants(dsm::TrainConfig{});
  }
  if (!flags.out.empty()) c.output_dir = flags.out;
  if (flags.seed) dsm::override_seed(&c, *flags.seed);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document structure measures and relation-type prediction"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    bool config_required;
    CommonFlags flags;
  };
  Command commands[] = {
      {"synth", "generate a synthetic corpus into <out>/synth", false, {}},
      {"parse", "parse the corpus into documents.jsonl", true, {}},
      {"annotate", "annotate entity mentions into mentions.jsonl", true, {}},
      {"index", "build the structure-aware index", true, {}},
      {"dsm", "compute DSM records for the triples", true, {}},
      {"build-graph", "build the typed graph with DSM edge scores", true, {}},
      {"split", "assign train/val/test splits", true, {}},
      {"train", "train every configured variant", true, {}},
      {"eval", "evaluate checkpoints and write reports", true, {}},
      {"run", "run the full pipeline", true, {}},
  };
  for (Command& c : commands) {
    add_common(app.add_subcommand(c.name, c.help), &c.flags, c.config_required);
  }

  CLI11_PARSE(app, argc, argv);

  for (Command& c : commands) {
    if (!app.got_subcommand(c.name)) continue;
    const std::string name = c.name;
    try {
      const dsm::PipelineConfig config = resolve(c.flags);
      if (name == "synth") dsm::stage_synth(config);
      if (name == "parse") dsm::stage_parse(config);
      if (name == "annotate") dsm::stage_annotate(config);
      if (name == "index") dsm::stage_index(config);
      if (name == "dsm") dsm::stage_dsm(config);
      if (name == "build-graph") dsm::stage_build_graph(config);
      if (name == "split") dsm::stage_split(config);
      if (name == "train") dsm::stage_train(config);
      if (name == "eval" || name == "run") {
        const auto report = name == "run" ? dsm::run_pipeline(config)
                                          : dsm::stage_eval(config);
        std::cout << report.accuracy_csv;
      }
    } catch (const dsm::Error& e) {
      std::cerr << "dsmtool " << name << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "dsmtool " << name << ": [" << name << "] " << e.what()
                << "\n";
      return 1;
    }
  }
  return 0;
}
