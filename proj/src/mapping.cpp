#include "xling/mapping.h"

#include <Eigen/SVD>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace xling {

void MappingConfig::validate() const {
  if (vocab_cutoff < 2) throw ContractError("vocab_cutoff must be >= 2");
  if (init_cutoff < 0) throw ContractError("init_cutoff must be >= 0");
  if (csls_k < 1) throw ContractError("csls_k must be >= 1");
  if (!(keep_prob_initial > 0.0 && keep_prob_initial <= 1.0)) {
    throw ContractError("keep_prob_initial must be in (0, 1]");
  }
  if (!(keep_prob_growth > 1.0)) throw ContractError("keep_prob_growth must be > 1");
  if (stall_patience < 1) throw ContractError("stall_patience must be >= 1");
  if (!(convergence_tol >= 0.0)) throw ContractError("convergence_tol must be >= 0");
  if (max_iterations < 1) throw ContractError("max_iterations must be >= 1");
}

SharedRotation shared_rotation(const Matrix& x_pairs, const Matrix& z_pairs) {
  if (x_pairs.rows() != z_pairs.rows() || x_pairs.cols() != z_pairs.cols()) {
    throw ContractError(fmt::format("procrustes: shape mismatch {}x{} vs {}x{}", x_pairs.rows(),
                                    x_pairs.cols(), z_pairs.rows(), z_pairs.cols()));
  }
  if (x_pairs.rows() < 1) throw ContractError("procrustes: no pairs");
  const Eigen::MatrixXd cross = x_pairs.transpose() * z_pairs;
  if (!cross.allFinite()) throw NumericalError("procrustes: non-finite cross-correlation");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("procrustes: SVD did not converge");
  return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

Matrix procrustes_solve(const Matrix& x_pairs, const Matrix& z_pairs) {
  const auto rot = shared_rotation(x_pairs, z_pairs);
  return rot.w_src * rot.w_trg.transpose();
}

namespace {

Matrix gather_rows(const Matrix& m, const BilingualDictionary& dict, bool source) {
  Matrix out(static_cast<Index>(dict.size()), m.cols());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const Index r = source ? dict.pairs[i].source : dict.pairs[i].target;
    if (r < 0 || r >= m.rows()) throw ContractError(fmt::format("dictionary index {} out of range", r));
    out.row(static_cast<Index>(i)) = m.row(r);
  }
  return out;
}

SharedRotation fit(const Matrix& x, const Matrix& z, const BilingualDictionary& dict) {
  return shared_rotation(gather_rows(x, dict, true), gather_rows(z, dict, false));
}

// Sorted intra-language similarity profiles of the first `cutoff` rows.
Matrix sorted_similarity_profiles(const EmbeddingMatrix& emb, Index cutoff) {
  const Matrix head = emb.topRows(cutoff);
  Matrix sim = head * head.transpose();
  for (Index i = 0; i < sim.rows(); ++i) {
    std::sort(sim.row(i).data(), sim.row(i).data() + sim.cols());
  }
  return normalized_rows(sim);
}

BilingualDictionary collect(const TwoWayMatches& m) {
  BilingualDictionary dict;
  for (std::size_t i = 0; i < m.forward.size(); ++i) dict.pairs.push_back({static_cast<Index>(i), m.forward[i]});
  for (std::size_t j = 0; j < m.backward.size(); ++j) dict.pairs.push_back({m.backward[j], static_cast<Index>(j)});
  if (!m.forward.empty() && !m.backward.empty()) {
    std::sort(dict.pairs.begin(), dict.pairs.end());
    dict.pairs.erase(std::unique(dict.pairs.begin(), dict.pairs.end()), dict.pairs.end());
  }
  return dict;
}

// One induction step over unit-normalized mapped spaces.
BilingualDictionary induce(const Matrix& xw, const Matrix& zw, const MappingConfig& cfg, double keep_prob,
                           std::uint64_t stream) {
  return collect(best_matches_two_way(xw, zw, cfg.retrieval, cfg.csls_k, cfg.direction != Direction::backward,
                                      cfg.direction != Direction::forward, Dropout{keep_prob, cfg.seed, stream},
                                      cfg.retrieval_options));
}

}  // namespace

BilingualDictionary unsupervised_init(const EmbeddingMatrix& x, const EmbeddingMatrix& z,
                                      const MappingConfig& cfg) {
  if (x.cols() != z.cols()) throw ContractError("unsupervised_init: dimension mismatch");
  if (cfg.vocab_cutoff < 1) throw ContractError("unsupervised_init: vocab_cutoff must be >= 1");
  if (cfg.vocab_cutoff > std::min(x.rows(), z.rows())) {
    throw ContractError(fmt::format("unsupervised_init: vocab_cutoff {} exceeds vocabulary sizes ({}, {})",
                                    cfg.vocab_cutoff, x.rows(), z.rows()));
  }
  const Index cutoff = cfg.init_cutoff > 0 ? std::min(cfg.init_cutoff, cfg.vocab_cutoff) : cfg.vocab_cutoff;
  const Matrix xs = sorted_similarity_profiles(x, cutoff);
  const Matrix zs = sorted_similarity_profiles(z, cutoff);
  return collect(best_matches_two_way(xs, zs, RetrievalMethod::nn, 1, true, true, {}, cfg.retrieval_options));
}

double mean_pair_cosine(const Matrix& x_mapped, const Matrix& z_mapped, const BilingualDictionary& dict) {
  if (dict.empty()) throw ContractError("mean_pair_cosine: empty dictionary");
  double sum = 0.0;
  for (const auto& p : dict.pairs) {
    const auto a = x_mapped.row(p.source);
    const auto b = z_mapped.row(p.target);
    const double denom = a.norm() * b.norm();
    sum += denom > 0.0 ? a.dot(b) / denom : 0.0;
  }
  return sum / static_cast<double>(dict.size());
}

EmbeddingMatrix apply_mapping(const EmbeddingMatrix& emb, const Matrix& w, const Vector& scale) {
  if (emb.cols() != w.rows()) throw ContractError("apply_mapping: dimension mismatch");
  EmbeddingMatrix out = emb * w;
  if (scale.size() > 0) {
    if (scale.size() != out.cols()) throw ContractError("apply_mapping: scale size mismatch");
    out.array().rowwise() *= scale.transpose().array();
  }
  return out;
}

double orthogonality_error(const Matrix& w) {
  return (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff();
}

MappingResult self_learning_align(const EmbeddingMatrix& x, const EmbeddingMatrix& z,
                                  const BilingualDictionary& init, const MappingConfig& cfg) {
  cfg.validate();
  if (init.empty()) throw ContractError("self_learning_align: empty initial dictionary");
  if (x.cols() != z.cols()) throw ContractError("self_learning_align: dimension mismatch");
  const Index src_size = std::min(cfg.vocab_cutoff, x.rows());
  const Index trg_size = std::min(cfg.vocab_cutoff, z.rows());
  if (cfg.retrieval == RetrievalMethod::csls && cfg.csls_k > std::min(src_size, trg_size) - 1) {
    throw ContractError(fmt::format("csls_k={} too large for {} x {} self-learning vocabulary", cfg.csls_k,
                                    src_size, trg_size));
  }
  const Matrix xs = normalized_rows(x.topRows(src_size));
  const Matrix zs = normalized_rows(z.topRows(trg_size));

  MappingResult result;
  BilingualDictionary dict = init;
  double keep_prob = cfg.keep_prob_initial;
  double best = -std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  SharedRotation rot;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    rot = fit(x, z, dict);
    const Matrix xw = xs * rot.w_src;
    const Matrix zw = zs * rot.w_trg;
    dict = induce(xw, zw, cfg, keep_prob, static_cast<std::uint64_t>(it));
    if (dict.empty()) throw AlignmentCollapseError(fmt::format("empty dictionary at iteration {}", it));
    const double objective = mean_pair_cosine(xw, zw, dict);
    if (!std::isfinite(objective)) throw NumericalError(fmt::format("non-finite objective at iteration {}", it));
    result.objective_trace.push_back(objective);
    result.keep_prob_trace.push_back(keep_prob);
    result.iterations = it;
    spdlog::debug("iteration {}: objective {:.6f} keep_prob {:.4f} pairs {}", it, objective, keep_prob,
                  dict.size());

    if (objective - best >= cfg.convergence_tol) {
      best = objective;
      last_improvement = it;
    } else if (keep_prob >= 1.0) {
      result.converged = true;
      break;
    }
    if (keep_prob < 1.0 && it - last_improvement >= cfg.stall_patience) {
      keep_prob = std::min(1.0, keep_prob * cfg.keep_prob_growth);
      last_improvement = it;
    }
  }

  rot = fit(x, z, dict);
  if (cfg.final_refit) {
    const RetrievalMethod method = cfg.retrieval;
    const int k = std::min<Index>(cfg.csls_k, std::min(x.rows(), z.rows()) - 1);
    const Matrix xw = x * rot.w_src;
    const Matrix zw = z * rot.w_trg;
    dict = induce_dictionary(xw, zw, method, k, cfg.direction, cfg.retrieval_options);
    if (dict.empty()) throw AlignmentCollapseError("empty dictionary in the final refit");
    rot = fit(x, z, dict);
  }
  result.w_src = rot.w_src;
  result.w_trg = rot.w_trg;
  if (cfg.symmetric_reweight) result.scale = rot.singular_values.cwiseSqrt();
  result.dictionary = std::move(dict);
  result.objective =
      mean_pair_cosine(x * result.w_src, z * result.w_trg, result.dictionary);
  if (!std::isfinite(result.objective)) throw NumericalError("non-finite final objective");
  return result;
}

}  // namespace xling
