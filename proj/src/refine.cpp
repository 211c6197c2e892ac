#include "xling/refine.h"

#include "xling/retrieval.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <unordered_map>
#include <unordered_set>

namespace xling {

const char* to_string(ConflictPolicy p) {
  return p == ConflictPolicy::first_pair ? "first-pair" : "mutual-only";
}

ConflictPolicy parse_conflict_policy(const std::string& s) {
  if (s == "first-pair") return ConflictPolicy::first_pair;
  if (s == "mutual-only") return ConflictPolicy::mutual_only;
  throw ContractError("unknown conflict policy '" + s + "' (expected first-pair or mutual-only)");
}

void RefinementConfig::validate() const {
  if (norm_iters < 0) throw ContractError("norm_iters must be >= 0");
  if (norm_iters > 0 && !(norm_tol > 0.0)) throw ContractError("norm_tol must be > 0");
}

namespace {

// Pairs (w, w') where w' is the nearest target of w and w the nearest source
// of w', over the full aligned spaces.
std::vector<bool> mutual_nearest(const EmbeddingMatrix& x, const EmbeddingMatrix& z,
                                 const BilingualDictionary& dict) {
  std::vector<Index> sources;
  std::vector<Index> targets;
  std::unordered_map<Index, std::size_t> src_slot;
  std::unordered_map<Index, std::size_t> trg_slot;
  for (const auto& p : dict.pairs) {
    if (src_slot.emplace(p.source, sources.size()).second) sources.push_back(p.source);
    if (trg_slot.emplace(p.target, targets.size()).second) targets.push_back(p.target);
  }
  const auto fwd = nn_retrieve_blocked(x, z, sources);
  const auto bwd = nn_retrieve_blocked(z, x, targets);
  std::vector<bool> keep(dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const auto& p = dict.pairs[i];
    keep[i] = fwd[src_slot.at(p.source)] == p.target && bwd[trg_slot.at(p.target)] == p.source;
  }
  return keep;
}

}  // namespace

AveragedSpaces average_vectors(const EmbeddingMatrix& x_aligned, const EmbeddingMatrix& z_aligned,
                               const BilingualDictionary& dict, ConflictPolicy policy) {
  if (x_aligned.cols() != z_aligned.cols()) throw ContractError("average_vectors: dimension mismatch");
  for (const auto& p : dict.pairs) {
    if (p.source < 0 || p.source >= x_aligned.rows() || p.target < 0 || p.target >= z_aligned.rows()) {
      throw ContractError(fmt::format("average_vectors: pair ({}, {}) out of range", p.source, p.target));
    }
  }

  std::vector<bool> eligible(dict.size(), true);
  if (policy == ConflictPolicy::mutual_only && !dict.empty()) {
    eligible = mutual_nearest(x_aligned, z_aligned, dict);
  }

  AveragedSpaces out{x_aligned, z_aligned, 0, 0, {}};
  std::unordered_set<Index> used_src;
  std::unordered_set<Index> used_trg;
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const auto& p = dict.pairs[i];
    if (!eligible[i] || used_src.contains(p.source) || used_trg.contains(p.target)) {
      ++out.pairs_skipped;
      continue;
    }
    used_src.insert(p.source);
    used_trg.insert(p.target);
    const Eigen::RowVectorXd mid = (x_aligned.row(p.source) + z_aligned.row(p.target)) / 2.0;
    out.x.row(p.source) = mid;
    out.z.row(p.target) = mid;
    out.retained.pairs.push_back(p);
    ++out.pairs_averaged;
  }
  return out;
}

RefinedSpaces refine_pipeline(const EmbeddingMatrix& x_aligned, const EmbeddingMatrix& z_aligned,
                              const BilingualDictionary& dict, const RefinementConfig& cfg) {
  cfg.validate();
  auto averaged = average_vectors(x_aligned, z_aligned, dict, cfg.conflict_policy);
  RefinedSpaces out;
  out.pairs_averaged = averaged.pairs_averaged;
  out.pairs_skipped = averaged.pairs_skipped;
  if (cfg.norm_iters == 0) {
    out.x_report = measure_normalization(averaged.x);
    out.z_report = measure_normalization(averaged.z);
    out.x_refined = std::move(averaged.x);
    out.z_refined = std::move(averaged.z);
    return out;
  }
  for (const auto& p : averaged.retained.pairs) {
    if (averaged.x.row(p.source).isZero(0.0)) {
      throw DegenerateInputError(fmt::format(
          "midpoint of pair ({}, {}) is the zero vector; the two vectors are opposite", p.source, p.target));
    }
  }
  auto x = iterative_normalize(averaged.x, cfg.norm_iters, cfg.norm_tol);
  auto z = iterative_normalize(averaged.z, cfg.norm_iters, cfg.norm_tol);
  out.x_refined = std::move(x.matrix);
  out.z_refined = std::move(z.matrix);
  out.x_report = x.report;
  out.z_report = z.report;
  for (const auto& [side, r] : {std::pair{"source", out.x_report}, std::pair{"target", out.z_report}}) {
    if (std::max(r.max_row_norm_deviation, r.max_center_magnitude) >= cfg.norm_tol) {
      spdlog::warn("{} space: normalization stopped after {} iterations above tolerance {} "
                   "(row norm deviation {:.3e}, mean {:.3e})",
                   side, r.iterations_run, cfg.norm_tol, r.max_row_norm_deviation, r.max_center_magnitude);
    }
  }
  return out;
}

}  // namespace xling
