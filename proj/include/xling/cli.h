#pragma once

#include "xling/eval.h"
#include "xling/mapping.h"
#include "xling/refine.h"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xling::cli {

inline constexpr const char* kVersion = "0.1.0";

// File names written into the output directory.
inline constexpr const char* kSrcMapped = "src.mapped.vec";
inline constexpr const char* kTrgMapped = "trg.mapped.vec";
inline constexpr const char* kDictionary = "dictionary.txt";
inline constexpr const char* kSrcRefined = "src.refined.vec";
inline constexpr const char* kTrgRefined = "trg.refined.vec";
inline constexpr const char* kInduced = "induced.txt";
inline constexpr const char* kEvalReport = "eval.kv";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kConfigSnapshot = "run.conf";

struct PipelineConfig {
  std::filesystem::path src;
  std::filesystem::path trg;
  std::filesystem::path gold;
  std::filesystem::path dict;
  std::filesystem::path out;
  std::optional<Index> max_vocab;
  std::string preprocess = "unit,center,unit";
  MappingConfig mapping;
  RefinementConfig refine;
  EvalSettings eval;
  bool skip_refine = false;
  std::string name = "system";
  std::string compare;
  int decimals = 2;
  int threads = 1;
  std::string log_level = "info";

  // Checks value ranges and that the input paths needed by `command` exist.
  void validate(const std::string& command) const;
};

PipelineConfig default_config();

// Sets one setting by its key (e.g. "vocab_cutoff"); throws ContractError on
// unknown keys or unparseable values.
void set_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" file with [section] headers. Keys may also appear
// outside any section.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);
// Config file text that reproduces cfg when loaded.
std::string to_config_text(const PipelineConfig& cfg);

// Stage commands. Each returns the process exit status: 0 success or
// converged, 2 completed without convergence. Errors propagate as exceptions.
int cmd_align(const PipelineConfig& cfg, std::ostream& out);
int cmd_refine(const PipelineConfig& cfg, std::ostream& out);
int cmd_induce(const PipelineConfig& cfg, std::ostream& out);
int cmd_evaluate(const PipelineConfig& cfg, std::ostream& out);
int cmd_pipeline(const PipelineConfig& cfg, std::ostream& out);

// Full command line entry point; maps exceptions to exit status 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xling::cli
