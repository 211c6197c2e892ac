#pragma once

#include "xling/types.h"

#include <cstdint>
#include <optional>
#include <vector>

namespace xling {

// m x p cosine similarities between query rows and candidate rows.
struct SimilarityBlock {
  Matrix values;
};

// Zero-norm rows have similarity 0 against everything.
SimilarityBlock cosine_block(const Matrix& queries, const Matrix& candidates);

// Row-wise argmax; ties go to the lowest index.
std::vector<Index> nn_retrieve(const SimilarityBlock& sim);

inline constexpr int kDefaultCslsK = 10;
inline constexpr Index kDefaultQueryBlock = 1024;

// Options shared by the blocked retrieval routines. Results do not depend on
// block_size or threads.
struct RetrievalOptions {
  Index block_size = kDefaultQueryBlock;
  int threads = 1;
};

// Mean of the k largest cosines of each row of `queries` against
// `candidates`.
Vector mean_topk_similarity(const Matrix& queries, const Matrix& candidates, int k,
                            const RetrievalOptions& opts = {});

// CSLS(x, z) = 2 cos(x, z) - r_T(x) - r_S(z), with r_T and r_S the mean cosine
// to the k nearest neighbours on the other side, taken over the full sets
// passed in. Returns argmax per query (all rows of x_mapped, or only
// query_indices when given), lowest index on ties.
// Requires 1 <= k <= n_z - 1 and k <= n_x.
std::vector<Index> csls_retrieve(const Matrix& x_mapped, const Matrix& z_mapped, int k,
                                 const std::optional<std::vector<Index>>& query_indices = std::nullopt,
                                 const RetrievalOptions& opts = {});

std::vector<Index> nn_retrieve_blocked(const Matrix& queries, const Matrix& candidates,
                                       const std::optional<std::vector<Index>>& query_indices = std::nullopt,
                                       const RetrievalOptions& opts = {});

// Forward adds (i, best(i)) for each source row, backward adds (best(j), j)
// for each target row. Union deduplicates and sorts by (source, target).
BilingualDictionary induce_dictionary(const Matrix& x_mapped, const Matrix& z_mapped,
                                      RetrievalMethod method, int k, Direction direction,
                                      const RetrievalOptions& opts = {});

// Unit-normalized copy; zero rows stay zero.
Matrix normalized_rows(const Matrix& m);

}  // namespace xling

namespace xling {

// Random masking of scores during self-learning. Each score survives with
// probability keep_prob, otherwise it becomes -inf. The decision for entry
// (i, j) is a hash of (seed, stream, i, j), so results are independent of
// blocking and scheduling.
struct Dropout {
  double keep_prob = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct BestMatches {
  std::vector<Index> index;
  // Score of the chosen candidate.
  std::vector<double> score;
};

// For each query row i (or query_indices[i]) returns argmax_j of
//   cos(q, c_j)                                          when method == nn
//   2 cos(q, c_j) - query_penalty[q] - cand_penalty[j]   when method == csls
// Inputs must already be unit-normalized (see normalized_rows).
BestMatches best_matches(const Matrix& queries_unit, const Matrix& candidates_unit,
                         RetrievalMethod method, const Vector& query_penalty,
                         const Vector& cand_penalty,
                         const std::optional<std::vector<Index>>& query_indices,
                         const RetrievalOptions& opts);

struct TwoWayMatches {
  // Best target per source row (empty unless requested).
  std::vector<Index> forward;
  // Best source per target row (empty unless requested).
  std::vector<Index> backward;
};

// Row-wise and column-wise argmax of one score matrix over unit-normalized
// x_unit and z_unit. The CSLS score is symmetric in its two arguments, so one
// blocked pass serves both directions; the hub penalties come from an earlier
// pass over the same blocks. Forward and backward use independent dropout
// masks (streams 2 * stream and 2 * stream + 1). Lowest index wins ties.
TwoWayMatches best_matches_two_way(const Matrix& x_unit, const Matrix& z_unit, RetrievalMethod method,
                                   int csls_k, bool forward, bool backward, const Dropout& dropout,
                                   const RetrievalOptions& opts);

}  // namespace xling
