#include <CLI11.hpp>

#include <malloc.h>

#include <cstdio>
#include <exception>

#include "pipeline.hpp"
#include "reacfuse/errors.hpp"

using namespace reacfuse;

int main(int argc, char** argv) {
  // transient per-batch tensors are large; keep them on the main arena so
  // they are reused instead of mmapped and faulted back in
  mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
  CLI::App app{"reaction-outcome models with text-augmented training"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  long seed = -1, threads = -1;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--seed", seed, "run seed (overrides REACFUSE_SEED)");
  app.add_option("--threads", threads, "worker threads, 1 = deterministic mode");
  app.add_option("--out", out_dir, "artifact directory");

  std::string strategy;
  struct Cmd {
    const char* name;
    const char* help;
    void (*fn)(const cli::RunContext&);
    bool takes_strategy;
  };
  const Cmd cmds[] = {
      {"gen-data", "generate the synthetic ELN corpus and vocabularies", cli::cmd_gen_data, false},
      {"pretrain-mlm", "masked-token pretraining of the reaction encoder", cli::cmd_pretrain_mlm,
       false},
      {"pretrain-lm", "byte-level LM pretraining ([lm] kind = proc|zsl)", cli::cmd_pretrain_lm,
       false},
      {"train-baseline", "fine-tune the reaction encoder on hard labels", cli::cmd_train_baseline,
       false},
      {"train-adapter", "joint yield+text training with the frozen LM", cli::cmd_train_adapter,
       false},
      {"zsl-extract", "frozen-LM last-token embeddings for the training pool",
       cli::cmd_zsl_extract, false},
      {"zsl-train-labeler", "train the shallow labeler on labeled embeddings",
       cli::cmd_zsl_train_labeler, false},
      {"zsl-label", "score unlabeled records with the trained labeler", cli::cmd_zsl_label, false},
      {"zsl-extend", "merge hard labels with strategy-filtered pseudo labels", nullptr, true},
      {"train-zsl", "fine-tune the reaction encoder on an extended dataset", nullptr, true},
      {"eval", "score a checkpoint on the temporal test split", cli::cmd_eval, false},
      {"report", "side-by-side comparison of evaluation reports", cli::cmd_report, false},
  };

  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();  // global flags may follow the subcommand name
    if (c.takes_strategy)
      sub->add_option("strategy", strategy, "binary | threshold | threshold-tight | continuous")
          ->required();
  }

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    cli::RunContext ctx = cli::make_context(name, config_path, out_dir, seed, threads);
    if (name == "zsl-extend") {
      cli::cmd_zsl_extend(ctx, strategy);
    } else if (name == "train-zsl") {
      cli::cmd_train_zsl(ctx, strategy);
    } else {
      for (const Cmd& c : cmds)
        if (name == c.name && c.fn) c.fn(ctx);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: numeric: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: data: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
}
