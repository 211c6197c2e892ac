#pragma once

#include "xling/types.h"

#include <string>
#include <vector>

namespace xling {

struct NormalizationReport {
  int iterations_run = 0;
  // max_i | ||x_i|| - 1 |
  double max_row_norm_deviation = 0.0;
  // || column mean ||
  double max_center_magnitude = 0.0;
};

struct LengthNormalized {
  EmbeddingMatrix matrix;
  Index zero_rows = 0;
};

// Scales every non-zero row to unit L2 norm. Zero rows stay zero and are
// counted (and logged as a warning).
LengthNormalized length_normalize(const EmbeddingMatrix& emb);

// Subtracts the column mean. Throws ContractError on an empty matrix.
EmbeddingMatrix mean_center(const EmbeddingMatrix& emb);

struct IterativeNormalized {
  EmbeddingMatrix matrix;
  NormalizationReport report;
};

inline constexpr int kDefaultNormIters = 5;
inline constexpr double kDefaultNormTol = 1e-6;

// Alternates unit-length scaling then mean centering until both the row-norm
// and the zero-mean conditions hold within tol, or max_iters alternations
// have run. The result is the centered iterate, so row norms are only
// within tol of 1. A zero row at any scaling step throws DegenerateInputError.
IterativeNormalized iterative_normalize(const EmbeddingMatrix& emb,
                                        int max_iters = kDefaultNormIters,
                                        double tol = kDefaultNormTol);

NormalizationReport measure_normalization(const EmbeddingMatrix& emb);

enum class PreprocessStep { unit, center };

// Parses a comma separated list such as "unit,center,unit". Empty string or
// "none" yields no steps.
std::vector<PreprocessStep> parse_preprocess_steps(const std::string& spec);
std::string format_preprocess_steps(const std::vector<PreprocessStep>& steps);

// Default pre-mapping pipeline: unit, center, unit.
const std::vector<PreprocessStep>& default_preprocess_steps();

EmbeddingMatrix preprocess(const EmbeddingMatrix& emb, const std::vector<PreprocessStep>& steps);

}  // namespace xling
