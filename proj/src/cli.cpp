#include "xling/cli.h"

#include "xling/embed_io.h"
#include "xling/preprocess.h"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace xling::cli {

namespace fs = std::filesystem;

namespace {

template <class T>
T parse_as(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) {
    throw ContractError(fmt::format("invalid value '{}' for {}", value, key));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ContractError(fmt::format("invalid boolean '{}' for {}", value, key));
}

std::vector<int> parse_ks(const std::string& value) {
  std::vector<int> ks;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) ks.push_back(parse_as<int>("ks", tok));
  if (ks.empty()) throw ContractError("ks must list at least one value");
  return ks;
}

std::string join_ks(const std::vector<int>& ks) {
  std::string out;
  for (int k : ks) out += (out.empty() ? "" : ",") + std::to_string(k);
  return out;
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

struct Setting {
  const char* section;
  const char* key;
  bool is_flag;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Setting>& settings() {
  using C = PipelineConfig;
  using S = std::string;
  static const std::vector<Setting> table{
      {"paths", "src", false, [](C& c, const S& v) { c.src = v; }, [](const C& c) { return c.src.string(); }},
      {"paths", "trg", false, [](C& c, const S& v) { c.trg = v; }, [](const C& c) { return c.trg.string(); }},
      {"paths", "gold", false, [](C& c, const S& v) { c.gold = v; }, [](const C& c) { return c.gold.string(); }},
      {"paths", "dict", false, [](C& c, const S& v) { c.dict = v; }, [](const C& c) { return c.dict.string(); }},
      {"paths", "out", false, [](C& c, const S& v) { c.out = v; }, [](const C& c) { return c.out.string(); }},
      {"paths", "max_vocab", false,
       [](C& c, const S& v) {
         if (v.empty() || v == "0") {
           c.max_vocab.reset();
         } else {
           c.max_vocab = parse_as<Index>("max_vocab", v);
         }
       },
       [](const C& c) { return c.max_vocab ? std::to_string(*c.max_vocab) : S("0"); }},
      {"preprocess", "preprocess", false,
       [](C& c, const S& v) { c.preprocess = format_preprocess_steps(parse_preprocess_steps(v)); },
       [](const C& c) { return c.preprocess; }},
      {"mapping", "vocab_cutoff", false,
       [](C& c, const S& v) { c.mapping.vocab_cutoff = parse_as<Index>("vocab_cutoff", v); },
       [](const C& c) { return std::to_string(c.mapping.vocab_cutoff); }},
      {"mapping", "init_cutoff", false,
       [](C& c, const S& v) { c.mapping.init_cutoff = parse_as<Index>("init_cutoff", v); },
       [](const C& c) { return std::to_string(c.mapping.init_cutoff); }},
      {"mapping", "csls_k", false,
       [](C& c, const S& v) { c.mapping.csls_k = c.eval.csls_k = parse_as<int>("csls_k", v); },
       [](const C& c) { return std::to_string(c.mapping.csls_k); }},
      {"mapping", "retrieval", false,
       [](C& c, const S& v) { c.mapping.retrieval = c.eval.method = parse_retrieval_method(v); },
       [](const C& c) { return S(to_string(c.mapping.retrieval)); }},
      {"mapping", "keep_prob_initial", false,
       [](C& c, const S& v) { c.mapping.keep_prob_initial = parse_as<double>("keep_prob_initial", v); },
       [](const C& c) { return fmt_real(c.mapping.keep_prob_initial); }},
      {"mapping", "keep_prob_growth", false,
       [](C& c, const S& v) { c.mapping.keep_prob_growth = parse_as<double>("keep_prob_growth", v); },
       [](const C& c) { return fmt_real(c.mapping.keep_prob_growth); }},
      {"mapping", "stall_patience", false,
       [](C& c, const S& v) { c.mapping.stall_patience = parse_as<int>("stall_patience", v); },
       [](const C& c) { return std::to_string(c.mapping.stall_patience); }},
      {"mapping", "convergence_tol", false,
       [](C& c, const S& v) { c.mapping.convergence_tol = parse_as<double>("convergence_tol", v); },
       [](const C& c) { return fmt_real(c.mapping.convergence_tol); }},
      {"mapping", "max_iterations", false,
       [](C& c, const S& v) { c.mapping.max_iterations = parse_as<int>("max_iterations", v); },
       [](const C& c) { return std::to_string(c.mapping.max_iterations); }},
      {"mapping", "direction", false, [](C& c, const S& v) { c.mapping.direction = parse_direction(v); },
       [](const C& c) { return S(to_string(c.mapping.direction)); }},
      {"mapping", "symmetric_reweight", true,
       [](C& c, const S& v) { c.mapping.symmetric_reweight = parse_bool("symmetric_reweight", v); },
       [](const C& c) { return S(c.mapping.symmetric_reweight ? "true" : "false"); }},
      {"mapping", "final_refit", false,
       [](C& c, const S& v) { c.mapping.final_refit = parse_bool("final_refit", v); },
       [](const C& c) { return S(c.mapping.final_refit ? "true" : "false"); }},
      {"refine", "norm_iters", false,
       [](C& c, const S& v) { c.refine.norm_iters = parse_as<int>("norm_iters", v); },
       [](const C& c) { return std::to_string(c.refine.norm_iters); }},
      {"refine", "norm_tol", false, [](C& c, const S& v) { c.refine.norm_tol = parse_as<double>("norm_tol", v); },
       [](const C& c) { return fmt_real(c.refine.norm_tol); }},
      {"refine", "conflict_policy", false,
       [](C& c, const S& v) { c.refine.conflict_policy = parse_conflict_policy(v); },
       [](const C& c) { return S(to_string(c.refine.conflict_policy)); }},
      {"refine", "skip_refine", true, [](C& c, const S& v) { c.skip_refine = parse_bool("skip_refine", v); },
       [](const C& c) { return S(c.skip_refine ? "true" : "false"); }},
      {"eval", "ks", false, [](C& c, const S& v) { c.eval.ks = parse_ks(v); },
       [](const C& c) { return join_ks(c.eval.ks); }},
      {"eval", "decimals", false, [](C& c, const S& v) { c.decimals = parse_as<int>("decimals", v); },
       [](const C& c) { return std::to_string(c.decimals); }},
      {"eval", "name", false, [](C& c, const S& v) { c.name = v; }, [](const C& c) { return c.name; }},
      {"eval", "compare", false, [](C& c, const S& v) { c.compare = v; }, [](const C& c) { return c.compare; }},
      {"run", "seed", false,
       [](C& c, const S& v) { c.mapping.seed = parse_as<std::uint64_t>("seed", v); },
       [](const C& c) { return std::to_string(c.mapping.seed); }},
      {"run", "threads", false, [](C& c, const S& v) { c.threads = parse_as<int>("threads", v); },
       [](const C& c) { return std::to_string(c.threads); }},
      {"run", "block_size", false,
       [](C& c, const S& v) {
         c.mapping.retrieval_options.block_size = c.eval.retrieval_options.block_size =
             parse_as<Index>("block_size", v);
       },
       [](const C& c) { return std::to_string(c.mapping.retrieval_options.block_size); }},
      {"run", "log_level", false, [](C& c, const S& v) { c.log_level = v; }, [](const C& c) { return c.log_level; }},
  };
  return table;
}

const Setting* find_setting(const std::string& key) {
  for (const auto& s : settings()) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

std::string flag_name(const char* key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

// Copies the thread count into the per-module retrieval options.
PipelineConfig resolved(PipelineConfig cfg) {
  cfg.mapping.retrieval_options.threads = cfg.threads;
  cfg.eval.retrieval_options.threads = cfg.threads;
  return cfg;
}

struct Embeddings {
  Vocabulary vocab;
  EmbeddingMatrix matrix;
};

Embeddings load(const fs::path& path, const std::optional<Index>& max_vocab) {
  auto loaded = load_embeddings(path, max_vocab);
  spdlog::info("loaded {} words x {} dims from {}", loaded.vocab.size(), loaded.matrix.cols(), path.string());
  return {std::move(loaded.vocab), std::move(loaded.matrix)};
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ContractError(fmt::format("missing --{} path", what));
  if (!fs::exists(p)) throw IoError(fmt::format("{} file '{}' does not exist", what, p.string()));
}

void ensure_out_dir(const fs::path& out) {
  if (out.empty()) throw ContractError("missing --out directory");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", out.string(), ec.message()));
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", p.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing '{}'", p.string()));
}

struct AlignSummary {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t pairs = 0;
};

AlignSummary run_align(const PipelineConfig& cfg, std::ostream& out) {
  auto src = load(cfg.src, cfg.max_vocab);
  auto trg = load(cfg.trg, cfg.max_vocab);
  const auto steps = parse_preprocess_steps(cfg.preprocess);
  const EmbeddingMatrix x = preprocess(src.matrix, steps);
  const EmbeddingMatrix z = preprocess(trg.matrix, steps);

  MappingConfig mc = cfg.mapping;
  const Index limit = std::min(x.rows(), z.rows());
  if (mc.vocab_cutoff > limit) {
    spdlog::info("vocab_cutoff {} reduced to the smaller vocabulary size {}", mc.vocab_cutoff, limit);
    mc.vocab_cutoff = limit;
  }
  const auto init = unsupervised_init(x, z, mc);
  spdlog::info("seed dictionary: {} pairs", init.size());
  const auto result = self_learning_align(x, z, init, mc);

  save_embeddings(src.vocab, apply_mapping(x, result.w_src, result.scale), cfg.out / kSrcMapped);
  save_embeddings(trg.vocab, apply_mapping(z, result.w_trg, result.scale), cfg.out / kTrgMapped);
  save_pair_dictionary(result.dictionary, src.vocab, trg.vocab, cfg.out / kDictionary);

  AlignSummary s{result.objective, result.iterations, result.converged, result.dictionary.size()};
  out << fmt::format("objective={:.6f}\niterations={}\nconverged={}\ndictionary_pairs={}\n", s.objective,
                     s.iterations, s.converged ? "true" : "false", s.pairs);
  return s;
}

RefinedSpaces run_refine(const PipelineConfig& cfg, std::ostream& out) {
  auto src = load(cfg.src, cfg.max_vocab);
  auto trg = load(cfg.trg, cfg.max_vocab);
  const auto dict = load_pair_dictionary(cfg.dict, src.vocab, trg.vocab);
  auto refined = refine_pipeline(src.matrix, trg.matrix, dict, cfg.refine);
  save_embeddings(src.vocab, refined.x_refined, cfg.out / kSrcRefined);
  save_embeddings(trg.vocab, refined.z_refined, cfg.out / kTrgRefined);
  out << fmt::format("pairs_averaged={}\npairs_skipped={}\n", refined.pairs_averaged, refined.pairs_skipped);
  for (const auto& [side, r] : {std::pair{"src", refined.x_report}, std::pair{"trg", refined.z_report}}) {
    out << fmt::format("{}.iterations_run={}\n{}.max_row_norm_deviation={:.3e}\n{}.max_center_magnitude={:.3e}\n",
                       side, r.iterations_run, side, r.max_row_norm_deviation, side, r.max_center_magnitude);
  }
  return refined;
}

EvalReport run_evaluate(const PipelineConfig& cfg, std::ostream& out) {
  if (cfg.name.empty() || cfg.name.find('.') != std::string::npos) {
    throw ContractError("system name must be non-empty and contain no '.'");
  }
  auto src = load(cfg.src, cfg.max_vocab);
  auto trg = load(cfg.trg, cfg.max_vocab);
  const auto gold = load_gold_dictionary(cfg.gold, src.vocab, trg.vocab);
  const auto report = precision_at_k(src.matrix, trg.matrix, gold, cfg.eval);

  std::vector<NamedReport> reports{{cfg.name, report}};
  std::string baseline = cfg.name;
  if (!cfg.compare.empty()) {
    fs::path file = cfg.compare;
    if (fs::is_directory(file)) file /= kEvalReport;
    const std::string text = read_text(file);
    const std::string base_system = text.substr(0, text.find('.'));
    baseline = fs::path(cfg.compare).filename().string();
    if (baseline.empty() || baseline == cfg.name) baseline = base_system + " (baseline)";
    reports.push_back({baseline, parse_key_values(text, base_system)});
  }
  out << format_table(compare_reports(reports, baseline), cfg.decimals);
  const std::string kv = format_key_values(cfg.name, report);
  out << kv;
  if (!cfg.out.empty()) {
    ensure_out_dir(cfg.out);
    write_text(cfg.out / kEvalReport, kv);
  }
  spdlog::info("evaluated {} sources ({} OOV, {} excluded)", report.evaluated_sources, report.oov_sources,
               report.excluded_sources);
  return report;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return cfg;
}

void PipelineConfig::validate(const std::string& command) const {
  mapping.validate();
  refine.validate();
  if (threads < 1) throw ContractError("threads must be >= 1");
  if (mapping.retrieval_options.block_size < 1) throw ContractError("block_size must be >= 1");
  if (decimals != 1 && decimals != 2) throw ContractError("decimals must be 1 or 2");
  if (max_vocab && *max_vocab < 1) throw ContractError("max_vocab must be positive");
  require_file(src, "src");
  require_file(trg, "trg");
  if (command == "refine") require_file(dict, "dict");
  if (command == "evaluate" || command == "pipeline") require_file(gold, "gold");
  if (command != "evaluate") ensure_out_dir(out);
}

void set_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto* s = find_setting(key);
  if (!s) throw ContractError(fmt::format("unknown setting '{}'", key));
  s->set(cfg, value);
}

void load_config_file(PipelineConfig& cfg, const fs::path& path) {
  if (!fs::exists(path)) throw IoError(fmt::format("config file '{}' does not exist", path.string()));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      set_value(cfg, name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      const auto* s = find_setting(key);
      if (!s || name != s->section) {
        throw ContractError(fmt::format("{}: unknown setting '{}.{}'", path.string(), name, key));
      }
      s->set(cfg, leaf.data());
    }
  }
}

std::string to_config_text(const PipelineConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& s : settings()) {
    if (section != s.section) {
      section = s.section;
      out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", section);
    }
    out += fmt::format("{} = {}\n", s.key, s.get(cfg));
  }
  return out;
}

int cmd_align(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate("align");
  return run_align(resolved(cfg), out).converged ? 0 : 2;
}

int cmd_refine(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate("refine");
  run_refine(resolved(cfg), out);
  return 0;
}

int cmd_induce(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate("induce");
  const auto c = resolved(cfg);
  auto src = load(c.src, c.max_vocab);
  auto trg = load(c.trg, c.max_vocab);
  const auto dict = induce_dictionary(src.matrix, trg.matrix, c.mapping.retrieval, c.mapping.csls_k,
                                      c.mapping.direction, c.mapping.retrieval_options);
  save_pair_dictionary(dict, src.vocab, trg.vocab, c.out / kInduced);
  out << fmt::format("dictionary_pairs={}\n", dict.size());
  return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate("evaluate");
  run_evaluate(resolved(cfg), out);
  return 0;
}

int cmd_pipeline(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate("pipeline");
  const auto c = resolved(cfg);
  nlohmann::ordered_json manifest;
  manifest["xling_version"] = kVersion;
  manifest["eigen_version"] =
      fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  manifest["compiler"] = __VERSION__;
  manifest["seed"] = c.mapping.seed;
  nlohmann::ordered_json config;
  for (const auto& s : settings()) config[s.section][s.key] = s.get(cfg);
  manifest["config"] = config;

  const auto t0 = std::chrono::steady_clock::now();
  const auto align = run_align(c, out);
  const double align_seconds = seconds_since(t0);

  PipelineConfig eval_cfg = c;
  eval_cfg.src = c.out / kSrcMapped;
  eval_cfg.trg = c.out / kTrgMapped;
  // Vocabulary truncation already happened in the align stage.
  eval_cfg.max_vocab.reset();
  double refine_seconds = 0.0;
  nlohmann::ordered_json refine_metrics;
  if (!c.skip_refine) {
    PipelineConfig rc = eval_cfg;
    rc.dict = c.out / kDictionary;
    const auto t1 = std::chrono::steady_clock::now();
    const auto refined = run_refine(rc, out);
    refine_seconds = seconds_since(t1);
    refine_metrics = {{"pairs_averaged", refined.pairs_averaged},
                      {"pairs_skipped", refined.pairs_skipped},
                      {"src_norm_iterations", refined.x_report.iterations_run},
                      {"trg_norm_iterations", refined.z_report.iterations_run}};
    eval_cfg.src = c.out / kSrcRefined;
    eval_cfg.trg = c.out / kTrgRefined;
  }
  const auto t2 = std::chrono::steady_clock::now();
  const auto report = run_evaluate(eval_cfg, out);
  const double eval_seconds = seconds_since(t2);

  nlohmann::ordered_json metrics;
  metrics["align"] = {{"objective", align.objective},
                      {"iterations", align.iterations},
                      {"converged", align.converged},
                      {"dictionary_pairs", align.pairs}};
  if (!c.skip_refine) metrics["refine"] = refine_metrics;
  nlohmann::ordered_json precision;
  for (const auto& [k, p] : report.precision_at) precision[fmt::format("p@{}", k)] = p;
  metrics["eval"] = {{"precision_at", precision},
                     {"evaluated_sources", report.evaluated_sources},
                     {"oov_sources", report.oov_sources},
                     {"excluded_sources", report.excluded_sources},
                     {"coverage", report.coverage}};
  manifest["metrics"] = metrics;
  manifest["timings_seconds"] = {{"align", align_seconds}, {"refine", refine_seconds}, {"evaluate", eval_seconds}};

  write_text(c.out / kManifest, manifest.dump(2) + "\n");
  write_text(c.out / kConfigSnapshot, to_config_text(cfg));
  return align.converged ? 0 : 2;
}

namespace {

std::string help_for(const std::string& key) {
  static const std::map<std::string, std::string> text{
      {"src", "source embeddings (word2vec text format)"},
      {"trg", "target embeddings (word2vec text format)"},
      {"gold", "gold dictionary, one 'source target' pair per line"},
      {"dict", "pair dictionary to average (refine)"},
      {"out", "output directory"},
      {"max_vocab", "read at most this many words per file (0 = all)"},
      {"preprocess", "steps before mapping, e.g. unit,center,unit or none"},
      {"vocab_cutoff", "most frequent words per language used in self-learning"},
      {"init_cutoff", "words used by the unsupervised seed (0 = vocab_cutoff)"},
      {"csls_k", "neighbourhood size of the CSLS hub penalty"},
      {"retrieval", "csls or nn, for induction and evaluation"},
      {"keep_prob_initial", "initial probability of keeping a similarity score"},
      {"keep_prob_growth", "factor applied to keep_prob after a stall"},
      {"stall_patience", "iterations without improvement before keep_prob grows"},
      {"convergence_tol", "minimum objective gain that counts as improvement"},
      {"max_iterations", "self-learning iteration limit (exit status 2 when hit)"},
      {"direction", "forward, backward or union"},
      {"symmetric_reweight", "scale mapped spaces by sqrt of the singular values"},
      {"final_refit", "refit on a full-vocabulary dictionary after the loop"},
      {"norm_iters", "normalization iterations after averaging (0 = averaging only)"},
      {"norm_tol", "normalization stopping tolerance"},
      {"conflict_policy", "first-pair or mutual-only"},
      {"skip_refine", "evaluate the aligned spaces without refinement"},
      {"ks", "comma separated k values for P@k"},
      {"decimals", "decimals in the comparison table (1 or 2)"},
      {"name", "system name in reports"},
      {"compare", "baseline run directory or eval.kv file"},
      {"seed", "random seed"},
      {"threads", "worker threads for similarity blocks"},
      {"block_size", "query rows per similarity block"},
      {"log_level", "trace, debug, info, warn, error or off"},
  };
  const auto it = text.find(key);
  return it == text.end() ? key : it->second;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised cross-lingual embedding alignment with midpoint refinement"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
  };
  static const std::vector<std::pair<const char*, const char*>> commands{
      {"align", "Map two embedding spaces into a shared space"},
      {"refine", "Average dictionary pairs and normalize the mapped spaces"},
      {"induce", "Induce a dictionary from mapped embeddings"},
      {"evaluate", "Score P@k against a gold dictionary"},
      {"pipeline", "align, refine and evaluate in sequence"},
  };
  std::vector<Sub> subs(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto& sub = subs[i];
    sub.app = app.add_subcommand(commands[i].first, commands[i].second);
    sub.app->add_option("--config", sub.config, "key = value config file; flags override it");
    for (const auto& s : settings()) {
      if (s.is_flag) {
        sub.app->add_flag(flag_name(s.key), sub.flags[s.key], help_for(s.key));
      } else {
        sub.app->add_option(flag_name(s.key), sub.values[s.key], help_for(s.key));
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto& sub : subs) {
      if (!sub.app->parsed()) continue;
      PipelineConfig cfg = default_config();
      if (!sub.config.empty()) load_config_file(cfg, sub.config);
      for (const auto& s : settings()) {
        const std::string flag = flag_name(s.key);
        if (sub.app->count(flag) == 0) continue;
        s.set(cfg, s.is_flag ? std::string(sub.flags[s.key] ? "true" : "false") : sub.values[s.key]);
      }
      auto logger = spdlog::get("xling");
      if (!logger) logger = spdlog::stderr_color_mt("xling");
      spdlog::set_default_logger(logger);
      spdlog::set_level(spdlog::level::from_str(cfg.log_level));

      const std::string name = sub.app->get_name();
      if (name == "align") return cmd_align(cfg, out);
      if (name == "refine") return cmd_refine(cfg, out);
      if (name == "induce") return cmd_induce(cfg, out);
      if (name == "evaluate") return cmd_evaluate(cfg, out);
      return cmd_pipeline(cfg, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace xling::cli
