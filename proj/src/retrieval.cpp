#include "xling/retrieval.h"

#include "parallel.h"
#include "similarity.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace xling {

namespace {

void check_dims(const Matrix& a, const Matrix& b, const char* what) {
  if (a.cols() != b.cols()) {
    throw ContractError(fmt::format("{}: dimension mismatch ({} vs {})", what, a.cols(), b.cols()));
  }
}

// Writes the k largest of v[0..n) to out in descending order.
void top_k_desc(const double* v, Index n, int k, double* out) {
  if (k > 64) {
    std::vector<double> tmp(v, v + n);
    std::partial_sort(tmp.begin(), tmp.begin() + k, tmp.end(), std::greater<>());
    std::copy(tmp.begin(), tmp.begin() + k, out);
    return;
  }
  int filled = 0;
  for (Index i = 0; i < n; ++i) {
    const double x = v[i];
    if (filled == k && !(x > out[k - 1])) continue;
    int pos = filled < k ? filled++ : k - 1;
    while (pos > 0 && out[pos - 1] < x) {
      out[pos] = out[pos - 1];
      --pos;
    }
    out[pos] = x;
  }
}

// Mean of the k largest entries of each row of `block`, summed in
// descending order.
void topk_mean_rows(const Matrix& block, int k, Eigen::Ref<Vector> out) {
  std::vector<double> top(static_cast<std::size_t>(k));
  for (Index i = 0; i < block.rows(); ++i) {
    top_k_desc(block.row(i).data(), block.cols(), k, top.data());
    double sum = 0.0;
    for (double v : top) sum += v;
    out(i) = sum / k;
  }
}

std::uint64_t mix64(std::uint64_t v) {
  v ^= v >> 30;
  v *= 0xbf58476d1ce4e5b9ULL;
  v ^= v >> 27;
  v *= 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

// Per-query hash base; entry (q, c) is kept iff mix64(base(q) ^ c) < threshold.
std::uint64_t dropout_base(const Dropout& d, std::uint64_t stream, Index query) {
  return mix64(mix64(mix64(d.seed) ^ stream) ^ static_cast<std::uint64_t>(query));
}

// Hash values below this keep the score.
std::uint64_t keep_threshold(double keep_prob) {
  if (keep_prob >= 1.0) return std::numeric_limits<std::uint64_t>::max();
  if (keep_prob <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::ldexp(keep_prob, 64));
}

}  // namespace

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

SimilarityBlock cosine_block(const Matrix& queries, const Matrix& candidates) {
  check_dims(queries, candidates, "cosine_block");
  const Matrix q = normalized_rows(queries);
  return {detail::CandidatePanel(normalized_rows(candidates)).scores(q, 0, q.rows())};
}

std::vector<Index> nn_retrieve(const SimilarityBlock& sim) {
  if (sim.values.cols() < 1) throw ContractError("nn_retrieve: no candidates");
  std::vector<Index> out(static_cast<std::size_t>(sim.values.rows()));
  for (Index i = 0; i < sim.values.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < sim.values.cols(); ++j) {
      if (sim.values(i, j) > sim.values(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Vector mean_topk_similarity(const Matrix& queries, const Matrix& candidates, int k,
                            const RetrievalOptions& opts) {
  check_dims(queries, candidates, "mean_topk_similarity");
  if (k < 1 || k > candidates.rows()) {
    throw ContractError(fmt::format("mean_topk_similarity: k={} outside [1, {}]", k, candidates.rows()));
  }
  const Matrix q = normalized_rows(queries);
  const detail::CandidatePanel c(normalized_rows(candidates));
  Vector out(q.rows());
  detail::for_each_block(q.rows(), opts.block_size, opts.threads, [&](Index begin, Index end) {
    const Matrix block = c.scores(q, begin, end);
    topk_mean_rows(block, k, out.segment(begin, end - begin));
  });
  return out;
}

BestMatches best_matches(const Matrix& queries_unit, const Matrix& candidates_unit,
                         RetrievalMethod method, const Vector& query_penalty,
                         const Vector& cand_penalty,
                         const std::optional<std::vector<Index>>& query_indices,
                         const RetrievalOptions& opts) {
  check_dims(queries_unit, candidates_unit, "best_matches");
  if (candidates_unit.rows() < 1) throw ContractError("best_matches: no candidates");
  const bool csls = method == RetrievalMethod::csls;
  if (csls && (query_penalty.size() != queries_unit.rows() ||
               cand_penalty.size() != candidates_unit.rows())) {
    throw ContractError("best_matches: penalty size mismatch");
  }
  const Index n = query_indices ? static_cast<Index>(query_indices->size()) : queries_unit.rows();
  auto query_row = [&](Index i) { return query_indices ? (*query_indices)[static_cast<std::size_t>(i)] : i; };
  for (Index i = 0; i < n; ++i) {
    const Index r = query_row(i);
    if (r < 0 || r >= queries_unit.rows()) throw ContractError("best_matches: query index out of range");
  }

  BestMatches out;
  out.index.resize(static_cast<std::size_t>(n));
  out.score.resize(static_cast<std::size_t>(n));
  const detail::CandidatePanel panel(candidates_unit);
  detail::for_each_block(n, opts.block_size, opts.threads, [&](Index begin, Index end) {
    Matrix q(end - begin, queries_unit.cols());
    for (Index i = begin; i < end; ++i) q.row(i - begin) = queries_unit.row(query_row(i));
    const Matrix cos = panel.scores(q, 0, q.rows());
    for (Index i = begin; i < end; ++i) {
      const Index r = query_row(i);
      Index best = 0;
      double best_score = 0.0;
      for (Index j = 0; j < cos.cols(); ++j) {
        const double s = csls ? 2.0 * cos(i - begin, j) - query_penalty(r) - cand_penalty(j)
                              : cos(i - begin, j);
        if (j == 0 || s > best_score) {
          best = j;
          best_score = s;
        }
      }
      out.index[static_cast<std::size_t>(i)] = best;
      out.score[static_cast<std::size_t>(i)] = best_score;
    }
  });
  return out;
}

TwoWayMatches best_matches_two_way(const Matrix& x_unit, const Matrix& z_unit, RetrievalMethod method,
                                   int csls_k, bool forward, bool backward, const Dropout& dropout,
                                   const RetrievalOptions& opts) {
  check_dims(x_unit, z_unit, "best_matches_two_way");
  const Index nx = x_unit.rows();
  const Index nz = z_unit.rows();
  if (nx < 1 || nz < 1) throw ContractError("best_matches_two_way: empty space");
  const bool csls = method == RetrievalMethod::csls;
  if (csls && (csls_k < 1 || csls_k > std::min(nx, nz))) {
    throw ContractError(fmt::format("best_matches_two_way: csls_k={} outside [1, {}]", csls_k, std::min(nx, nz)));
  }
  const Index block = std::max<Index>(1, opts.block_size);
  const Index blocks = (nx + block - 1) / block;
  const detail::CandidatePanel panel(z_unit);
  const auto block_scores = [&](Index begin, Index end) { return panel.scores(x_unit, begin, end); };

  // Hub penalties: row top-k directly, column top-k from per-block
  // candidates merged after all blocks are done.
  Vector r_x;
  Vector r_z;
  if (csls) {
    r_x.resize(nx);
    r_z.resize(nz);
    std::vector<Matrix> col_candidates(static_cast<std::size_t>(blocks));
    detail::for_each_block(nx, block, opts.threads, [&](Index begin, Index end) {
      const Matrix s = block_scores(begin, end);
      const Matrix t = s.transpose();
      const int keep = static_cast<int>(std::min<Index>(csls_k, end - begin));
      Matrix cand(nz, keep);
      for (Index j = 0; j < nz; ++j) top_k_desc(t.row(j).data(), t.cols(), keep, cand.row(j).data());
      col_candidates[static_cast<std::size_t>(begin / block)] = std::move(cand);
      topk_mean_rows(s, csls_k, r_x.segment(begin, end - begin));
    });
    Index width = 0;
    for (const auto& c : col_candidates) width += c.cols();
    Matrix all(nz, width);
    Index col = 0;
    for (const auto& c : col_candidates) {
      all.middleCols(col, c.cols()) = c;
      col += c.cols();
    }
    topk_mean_rows(all, csls_k, r_z);
  }

  const std::uint64_t threshold = keep_threshold(dropout.keep_prob);
  const bool drop = dropout.keep_prob < 1.0;
  constexpr double kMasked = -std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> col_base;
  if (drop && backward) {
    col_base.resize(static_cast<std::size_t>(nz));
    for (Index j = 0; j < nz; ++j) col_base[static_cast<std::size_t>(j)] = dropout_base(dropout, 2 * dropout.stream + 1, j);
  }

  TwoWayMatches out;
  if (forward) out.forward.assign(static_cast<std::size_t>(nx), 0);
  struct ColumnBest {
    std::vector<double> score;
    std::vector<Index> index;
  };
  std::vector<ColumnBest> col_best(backward ? static_cast<std::size_t>(blocks) : 0);

  detail::for_each_block(nx, block, opts.threads, [&](Index begin, Index end) {
    Matrix s = block_scores(begin, end);
    if (csls) {
      for (Index i = begin; i < end; ++i) {
        auto row = s.row(i - begin);
        for (Index j = 0; j < nz; ++j) row(j) = 2.0 * row(j) - r_x(i) - r_z(j);
      }
    }
    if (forward) {
      for (Index i = begin; i < end; ++i) {
        const auto row = s.row(i - begin);
        const std::uint64_t base = drop ? dropout_base(dropout, 2 * dropout.stream, i) : 0;
        Index best = -1;
        double best_score = kMasked;
        for (Index j = 0; j < nz; ++j) {
          const double v = (drop && mix64(base ^ static_cast<std::uint64_t>(j)) >= threshold) ? kMasked : row(j);
          if (best < 0 || v > best_score) {
            best = j;
            best_score = v;
          }
        }
        out.forward[static_cast<std::size_t>(i)] = best;
      }
    }
    if (backward) {
      ColumnBest cb{std::vector<double>(static_cast<std::size_t>(nz), kMasked),
                    std::vector<Index>(static_cast<std::size_t>(nz), -1)};
      for (Index i = begin; i < end; ++i) {
        const auto row = s.row(i - begin);
        for (Index j = 0; j < nz; ++j) {
          const auto ju = static_cast<std::size_t>(j);
          const double v =
              (drop && mix64(col_base[ju] ^ static_cast<std::uint64_t>(i)) >= threshold) ? kMasked : row(j);
          if (cb.index[ju] < 0 || v > cb.score[ju]) {
            cb.index[ju] = i;
            cb.score[ju] = v;
          }
        }
      }
      col_best[static_cast<std::size_t>(begin / block)] = std::move(cb);
    }
  });

  if (backward) {
    out.backward.assign(static_cast<std::size_t>(nz), 0);
    for (Index j = 0; j < nz; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      Index best = -1;
      double best_score = kMasked;
      // Blocks in row order with strict improvement keep the lowest index.
      for (const auto& cb : col_best) {
        if (best < 0 || cb.score[ju] > best_score) {
          best = cb.index[ju];
          best_score = cb.score[ju];
        }
      }
      out.backward[ju] = best;
    }
  }
  return out;
}

std::vector<Index> csls_retrieve(const Matrix& x_mapped, const Matrix& z_mapped, int k,
                                 const std::optional<std::vector<Index>>& query_indices,
                                 const RetrievalOptions& opts) {
  check_dims(x_mapped, z_mapped, "csls_retrieve");
  if (k < 1 || k > z_mapped.rows() - 1 || k > x_mapped.rows()) {
    throw ContractError(fmt::format("csls_retrieve: k={} outside [1, min(n_z - 1, n_x)] = [1, {}]", k,
                                    std::min(z_mapped.rows() - 1, x_mapped.rows())));
  }
  const Matrix x = normalized_rows(x_mapped);
  const Matrix z = normalized_rows(z_mapped);
  const Vector r_t = mean_topk_similarity(x, z, k, opts);
  const Vector r_s = mean_topk_similarity(z, x, k, opts);
  return best_matches(x, z, RetrievalMethod::csls, r_t, r_s, query_indices, opts).index;
}

std::vector<Index> nn_retrieve_blocked(const Matrix& queries, const Matrix& candidates,
                                       const std::optional<std::vector<Index>>& query_indices,
                                       const RetrievalOptions& opts) {
  check_dims(queries, candidates, "nn_retrieve_blocked");
  return best_matches(normalized_rows(queries), normalized_rows(candidates), RetrievalMethod::nn, {}, {},
                      query_indices, opts)
      .index;
}

BilingualDictionary induce_dictionary(const Matrix& x_mapped, const Matrix& z_mapped,
                                      RetrievalMethod method, int k, Direction direction,
                                      const RetrievalOptions& opts) {
  auto retrieve = [&](const Matrix& q, const Matrix& c) {
    return method == RetrievalMethod::csls ? csls_retrieve(q, c, k, std::nullopt, opts)
                                           : nn_retrieve_blocked(q, c, std::nullopt, opts);
  };
  BilingualDictionary dict;
  if (direction != Direction::backward) {
    const auto fwd = retrieve(x_mapped, z_mapped);
    for (std::size_t i = 0; i < fwd.size(); ++i) dict.pairs.push_back({static_cast<Index>(i), fwd[i]});
  }
  if (direction != Direction::forward) {
    const auto bwd = retrieve(z_mapped, x_mapped);
    for (std::size_t j = 0; j < bwd.size(); ++j) dict.pairs.push_back({bwd[j], static_cast<Index>(j)});
  }
  if (direction == Direction::union_of_both) {
    std::sort(dict.pairs.begin(), dict.pairs.end());
    dict.pairs.erase(std::unique(dict.pairs.begin(), dict.pairs.end()), dict.pairs.end());
  }
  return dict;
}

}  // namespace xling
