#include "similarity.h"

#include <algorithm>
#include <cstring>

namespace xling::detail {

namespace {

constexpr Index kTile = 32;
constexpr Index kDepthBlock = 256;
constexpr Index kRowBlock = 64;
constexpr int kRows = 6;

// Fixed-width lanes so the accumulators stay in registers.
using Lanes = double __attribute__((vector_size(64)));
constexpr Index kLanes = sizeof(Lanes) / sizeof(double);
constexpr Index kVectors = kTile / kLanes;

Lanes load(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

void store(double* p, const Lanes& v) { std::memcpy(p, &v, sizeof v); }

// out[r][j] += q[r][k] * p[k][j] for k in [0, depth), one fused or unfused
// multiply-add per step depending on the target, the same for every entry.
template <int R>
void micro_kernel(const double* const* q, const double* p, Index depth, double* const* out) {
  Lanes acc[R][kVectors];
  for (int r = 0; r < R; ++r)
    for (Index v = 0; v < kVectors; ++v) acc[r][v] = load(out[r] + v * kLanes);
  for (Index k = 0; k < depth; ++k) {
    Lanes pk[kVectors];
    for (Index v = 0; v < kVectors; ++v) pk[v] = load(p + k * kTile + v * kLanes);
    for (int r = 0; r < R; ++r) {
      const double a = q[r][k];
      for (Index v = 0; v < kVectors; ++v) acc[r][v] += a * pk[v];
    }
  }
  for (int r = 0; r < R; ++r)
    for (Index v = 0; v < kVectors; ++v) store(out[r] + v * kLanes, acc[r][v]);
}

}  // namespace

CandidatePanel::CandidatePanel(const Matrix& candidates)
    : n_(candidates.rows()), d_(candidates.cols()), tiles_((candidates.rows() + kTile - 1) / kTile) {
  packed_.assign(static_cast<std::size_t>(tiles_ * d_ * kTile), 0.0);
  for (Index j = 0; j < n_; ++j) {
    double* tile = packed_.data() + (j / kTile) * d_ * kTile;
    for (Index k = 0; k < d_; ++k) tile[k * kTile + j % kTile] = candidates(j, k);
  }
}

Matrix CandidatePanel::scores(const Matrix& queries, Index begin, Index end) const {
  const Index m = end - begin;
  const Index width = tiles_ * kTile;
  // Reused across calls: fresh multi-megabyte buffers cost a page fault per
  // page on every self-learning iteration.
  thread_local std::vector<double> buf;
  buf.assign(static_cast<std::size_t>(m * width), 0.0);
  for (Index k0 = 0; k0 < d_; k0 += kDepthBlock) {
    const Index depth = std::min(kDepthBlock, d_ - k0);
    for (Index i0 = 0; i0 < m; i0 += kRowBlock) {
      const Index i1 = std::min(m, i0 + kRowBlock);
      for (Index t = 0; t < tiles_; ++t) {
        const double* p = packed_.data() + (t * d_ + k0) * kTile;
        Index i = i0;
        for (; i + kRows <= i1; i += kRows) {
          const double* q[kRows];
          double* out[kRows];
          for (int r = 0; r < kRows; ++r) {
            q[r] = queries.row(begin + i + r).data() + k0;
            out[r] = buf.data() + (i + r) * width + t * kTile;
          }
          micro_kernel<kRows>(q, p, depth, out);
        }
        for (; i < i1; ++i) {
          const double* q[1] = {queries.row(begin + i).data() + k0};
          double* out[1] = {buf.data() + i * width + t * kTile};
          micro_kernel<1>(q, p, depth, out);
        }
      }
    }
  }
  Matrix result(m, n_);
  for (Index i = 0; i < m; ++i)
    std::copy_n(buf.data() + i * width, n_, result.row(i).data());
  return result;
}

}  // namespace xling::detail
