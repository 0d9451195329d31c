#ifndef REACFUSE_TOOLS_PIPELINE_HPP
#define REACFUSE_TOOLS_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "reacfuse/ini.hpp"

namespace reacfuse::cli {

struct RunContext {
  std::filesystem::path out;
  Ini cfg;  // fully resolved against the global schema
  std::uint64_t seed = 1;
  int threads = 1;
  std::string command;

  std::filesystem::path artifact(const std::string& name) const { return out / name; }
};

// Complete key set every command resolves against, paper defaults included.
ConfigSchema full_schema();

RunContext make_context(const std::string& command, const std::string& config_path,
                        const std::string& out_dir, long seed_flag, long threads_flag);

// Writes <command>.config (resolved) and <command>.manifest.json with
// sha256 of every input and output artifact.
void finish_run(const RunContext& ctx, const std::vector<std::filesystem::path>& inputs,
                const std::vector<std::filesystem::path>& outputs);

// command entry points; throw typed errors, no direct exits
void cmd_gen_data(const RunContext& ctx);
void cmd_pretrain_mlm(const RunContext& ctx);
void cmd_pretrain_lm(const RunContext& ctx);
void cmd_train_baseline(const RunContext& ctx);
void cmd_train_adapter(const RunContext& ctx);
void cmd_zsl_extract(const RunContext& ctx);
void cmd_zsl_train_labeler(const RunContext& ctx);
void cmd_zsl_label(const RunContext& ctx);
void cmd_zsl_extend(const RunContext& ctx, const std::string& strategy);
void cmd_train_zsl(const RunContext& ctx, const std::string& strategy);
void cmd_eval(const RunContext& ctx);
void cmd_report(const RunContext& ctx);

}  // namespace reacfuse::cli

#endif
