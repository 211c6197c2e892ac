#include "xling/preprocess.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <sstream>

namespace xling {

LengthNormalized length_normalize(const EmbeddingMatrix& emb) {
  LengthNormalized out{emb, 0};
  for (Index i = 0; i < out.matrix.rows(); ++i) {
    const double norm = out.matrix.row(i).norm();
    if (norm == 0.0) {
      ++out.zero_rows;
      continue;
    }
    out.matrix.row(i) /= norm;
  }
  if (out.zero_rows > 0) spdlog::warn("length_normalize: {} zero rows left unnormalized", out.zero_rows);
  return out;
}

EmbeddingMatrix mean_center(const EmbeddingMatrix& emb) {
  if (emb.rows() == 0) throw ContractError("mean_center: empty matrix");
  const Eigen::RowVectorXd mean = emb.colwise().mean();
  return emb.rowwise() - mean;
}

NormalizationReport measure_normalization(const EmbeddingMatrix& emb) {
  NormalizationReport r;
  if (emb.rows() == 0) return r;
  r.max_row_norm_deviation = (emb.rowwise().norm().array() - 1.0).abs().maxCoeff();
  r.max_center_magnitude = emb.colwise().mean().norm();
  return r;
}

IterativeNormalized iterative_normalize(const EmbeddingMatrix& emb, int max_iters, double tol) {
  if (max_iters < 1) throw ContractError("iterative_normalize: max_iters must be >= 1");
  if (!(tol > 0.0)) throw ContractError("iterative_normalize: tol must be > 0");
  if (emb.rows() == 0) throw ContractError("iterative_normalize: empty matrix");

  IterativeNormalized out{emb, {}};
  EmbeddingMatrix& x = out.matrix;
  for (int k = 1; k <= max_iters; ++k) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double norm = x.row(i).norm();
      if (norm == 0.0) {
        throw DegenerateInputError(
            fmt::format("iterative_normalize: row {} is zero at iteration {}", i, k));
      }
      x.row(i) /= norm;
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    out.report = measure_normalization(x);
    out.report.iterations_run = k;
    if (std::max(out.report.max_row_norm_deviation, out.report.max_center_magnitude) < tol) break;
  }
  return out;
}

std::vector<PreprocessStep> parse_preprocess_steps(const std::string& spec) {
  std::vector<PreprocessStep> steps;
  if (spec.empty() || spec == "none") return steps;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "unit") {
      steps.push_back(PreprocessStep::unit);
    } else if (tok == "center") {
      steps.push_back(PreprocessStep::center);
    } else {
      throw ContractError(fmt::format("unknown preprocessing step '{}' (expected unit or center)", tok));
    }
  }
  return steps;
}

std::string format_preprocess_steps(const std::vector<PreprocessStep>& steps) {
  if (steps.empty()) return "none";
  std::string out;
  for (auto s : steps) {
    if (!out.empty()) out += ',';
    out += s == PreprocessStep::unit ? "unit" : "center";
  }
  return out;
}

const std::vector<PreprocessStep>& default_preprocess_steps() {
  static const std::vector<PreprocessStep> steps{PreprocessStep::unit, PreprocessStep::center,
                                                 PreprocessStep::unit};
  return steps;
}

EmbeddingMatrix preprocess(const EmbeddingMatrix& emb, const std::vector<PreprocessStep>& steps) {
  EmbeddingMatrix x = emb;
  for (auto s : steps) x = s == PreprocessStep::unit ? length_normalize(x).matrix : mean_center(x);
  return x;
}

}  // namespace xling
