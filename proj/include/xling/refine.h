#pragma once

#include "xling/preprocess.h"
#include "xling/types.h"

namespace xling {

enum class ConflictPolicy {
  // Only the first pair (dictionary order) touching a word is averaged.
  first_pair,
  // Only pairs that are mutual nearest neighbours in the aligned spaces.
  mutual_only,
};

const char* to_string(ConflictPolicy p);
ConflictPolicy parse_conflict_policy(const std::string& s);

struct RefinementConfig {
  // 0 applies the averaging phase only.
  int norm_iters = kDefaultNormIters;
  double norm_tol = kDefaultNormTol;
  ConflictPolicy conflict_policy = ConflictPolicy::first_pair;

  void validate() const;
};

struct AveragedSpaces {
  EmbeddingMatrix x;
  EmbeddingMatrix z;
  Index pairs_averaged = 0;
  Index pairs_skipped = 0;
  // The pairs that were averaged, in dictionary order.
  BilingualDictionary retained;
};

// Replaces both vectors of every retained pair by their midpoint
// (v_w + v_w') / 2. Rows outside retained pairs are untouched.
AveragedSpaces average_vectors(const EmbeddingMatrix& x_aligned, const EmbeddingMatrix& z_aligned,
                               const BilingualDictionary& dict, ConflictPolicy policy);

struct RefinedSpaces {
  EmbeddingMatrix x_refined;
  EmbeddingMatrix z_refined;
  Index pairs_averaged = 0;
  Index pairs_skipped = 0;
  NormalizationReport x_report;
  NormalizationReport z_report;
};

// Midpoint averaging, then iterative normalization of each space on its own.
RefinedSpaces refine_pipeline(const EmbeddingMatrix& x_aligned, const EmbeddingMatrix& z_aligned,
                              const BilingualDictionary& dict, const RefinementConfig& cfg);

}  // namespace xling
