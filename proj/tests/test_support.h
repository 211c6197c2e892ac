#pragma once

// Shared generators and brute-force oracles for the test suites. The oracles
// evaluate the defining formulas element by element and do not call into the
// library's blocked retrieval code.

#include "xling/types.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace xling::testing {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

// Orthogonal matrix from the QR decomposition of a Gaussian matrix.
inline Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  Eigen::MatrixXd g = gaussian(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix column signs so the distribution is uniform.
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (Index j = 0; j < d; ++j)
    if (diag(j) < 0) q.col(j) = -q.col(j);
  return q;
}

inline std::vector<Index> random_permutation(Index n, std::mt19937_64& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline void unit_rows(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).norm();
}

inline void center_cols(Matrix& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
}

// Source and target spaces where target row perm[i] is source row i rotated
// by rotation, optionally with Gaussian noise before re-normalization.
struct SyntheticPair {
  Matrix x;
  Matrix z;
  Matrix rotation;
  std::vector<Index> perm;
};

inline SyntheticPair synthetic_pair(Index n, Index d, std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  SyntheticPair s;
  s.x = gaussian(n, d, rng);
  unit_rows(s.x);
  center_cols(s.x);
  unit_rows(s.x);
  center_cols(s.x);
  s.rotation = random_orthogonal(d, rng);
  s.perm = random_permutation(n, rng);
  const Matrix rotated = s.x * s.rotation;
  s.z.resize(n, d);
  for (Index i = 0; i < n; ++i) s.z.row(s.perm[static_cast<std::size_t>(i)]) = rotated.row(i);
  if (noise > 0.0) {
    std::normal_distribution<double> eps(0.0, noise);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) s.z(i, j) += eps(rng);
    unit_rows(s.z);
  }
  return s;
}

inline double cosine(const Matrix& a, Index i, const Matrix& b, Index j) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (Index t = 0; t < a.cols(); ++t) {
    dot += a(i, t) * b(j, t);
    na += a(i, t) * a(i, t);
    nb += b(j, t) * b(j, t);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Direct evaluation of 2 cos(x, z) - r_T(x) - r_S(z) over all pairs.
inline std::vector<Index> csls_oracle(const Matrix& x, const Matrix& z, int k) {
  const Index nx = x.rows();
  const Index nz = z.rows();
  Matrix cos(nx, nz);
  for (Index i = 0; i < nx; ++i)
    for (Index j = 0; j < nz; ++j) cos(i, j) = cosine(x, i, z, j);
  auto topk_mean = [k](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    double s = 0.0;
    for (int t = 0; t < k; ++t) s += v[static_cast<std::size_t>(t)];
    return s / k;
  };
  std::vector<double> r_t(static_cast<std::size_t>(nx));
  std::vector<double> r_s(static_cast<std::size_t>(nz));
  for (Index i = 0; i < nx; ++i) {
    std::vector<double> row(cos.row(i).data(), cos.row(i).data() + nz);
    r_t[static_cast<std::size_t>(i)] = topk_mean(row);
  }
  for (Index j = 0; j < nz; ++j) {
    std::vector<double> col(static_cast<std::size_t>(nx));
    for (Index i = 0; i < nx; ++i) col[static_cast<std::size_t>(i)] = cos(i, j);
    r_s[static_cast<std::size_t>(j)] = topk_mean(col);
  }
  std::vector<Index> out(static_cast<std::size_t>(nx));
  for (Index i = 0; i < nx; ++i) {
    Index best = 0;
    double best_score = 0.0;
    for (Index j = 0; j < nz; ++j) {
      const double s = 2.0 * cos(i, j) - r_t[static_cast<std::size_t>(i)] - r_s[static_cast<std::size_t>(j)];
      if (j == 0 || s > best_score) {
        best = j;
        best_score = s;
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// P@k by scanning each full score row: a source is correct at k when fewer
// than k candidates outrank its best gold target (ties ranked by index).
inline double precision_recount(const Matrix& scores, const std::vector<std::set<Index>>& gold, int k) {
  int correct = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    const auto& targets = gold[static_cast<std::size_t>(i)];
    bool hit = false;
    for (Index g : targets) {
      int better = 0;
      for (Index j = 0; j < scores.cols(); ++j) {
        if (scores(i, j) > scores(i, g) || (scores(i, j) == scores(i, g) && j < g)) ++better;
      }
      if (better < k) hit = true;
    }
    if (hit) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.rows());
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("xling_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace xling::testing
