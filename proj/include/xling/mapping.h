#pragma once

#include "xling/retrieval.h"
#include "xling/types.h"

#include <cstdint>
#include <vector>

namespace xling {

struct MappingConfig {
  // Words per language (file order) used during self-learning.
  Index vocab_cutoff = 20000;
  // Words per language used by the similarity-distribution seed; 0 means
  // vocab_cutoff. The seed builds two init_cutoff^2 matrices.
  Index init_cutoff = 4000;
  int csls_k = kDefaultCslsK;
  RetrievalMethod retrieval = RetrievalMethod::csls;
  double keep_prob_initial = 0.1;
  double keep_prob_growth = 2.0;
  int stall_patience = 50;
  double convergence_tol = 1e-6;
  int max_iterations = 10000;
  Direction direction = Direction::union_of_both;
  std::uint64_t seed = 0;
  // Scale both mapped spaces by sqrt of the cross-correlation singular values.
  bool symmetric_reweight = false;
  // Refit the transforms on a dictionary induced over the full vocabularies
  // once the loop stops.
  bool final_refit = true;
  RetrievalOptions retrieval_options{};

  // Throws ContractError when a field is out of range.
  void validate() const;
};

struct MappingResult {
  Matrix w_src;
  Matrix w_trg;
  // Per-dimension scale applied after w_src / w_trg; empty unless reweighting.
  Vector scale;
  BilingualDictionary dictionary;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Objective after each self-learning iteration, in order.
  std::vector<double> objective_trace;
  // keep_prob in effect at each iteration.
  std::vector<double> keep_prob_trace;
};

// Orthogonal W minimizing ||XW - Z||_F, via the SVD of X^T Z = U S V^T, W = U V^T.
Matrix procrustes_solve(const Matrix& x_pairs, const Matrix& z_pairs);

// Same SVD split into the per-language rotations U and V, so that
// X U ~ Z V. singular_values is S.
struct SharedRotation {
  Matrix w_src;
  Matrix w_trg;
  Vector singular_values;
};
SharedRotation shared_rotation(const Matrix& x_pairs, const Matrix& z_pairs);

// Similarity-distribution seed: on the first cutoff rows, sort each row of
// X X^T and Z Z^T ascending, length-normalize, and match the sorted rows by
// nearest neighbour in both directions (union).
BilingualDictionary unsupervised_init(const EmbeddingMatrix& x, const EmbeddingMatrix& z,
                                      const MappingConfig& cfg);

// Self-learning loop alternating Procrustes fits and dictionary induction.
// Throws AlignmentCollapseError on an empty induced dictionary and
// NumericalError on a non-finite objective.
MappingResult self_learning_align(const EmbeddingMatrix& x, const EmbeddingMatrix& z,
                                  const BilingualDictionary& init, const MappingConfig& cfg);

// emb * w, then column scaling when scale is non-empty.
EmbeddingMatrix apply_mapping(const EmbeddingMatrix& emb, const Matrix& w, const Vector& scale = {});

// Mean cosine of dictionary pairs between two (already mapped) spaces.
double mean_pair_cosine(const Matrix& x_mapped, const Matrix& z_mapped,
                        const BilingualDictionary& dict);

// max |W^T W - I|
double orthogonality_error(const Matrix& w);

}  // namespace xling
