#pragma once

#include "xling/types.h"

#include <vector>

namespace xling::detail {

// Dot products of query rows against a fixed candidate set. Every entry is
// the same left-to-right sum over the dimension, whatever its position in
// the output, so identical rows score bitwise identically. A general matrix
// product does not guarantee that, and exact ties then fall to rounding
// instead of to the lowest index.
class CandidatePanel {
 public:
  explicit CandidatePanel(const Matrix& candidates);

  Index size() const { return n_; }
  Index dim() const { return d_; }

  // (end - begin) x size() products for rows [begin, end) of queries.
  Matrix scores(const Matrix& queries, Index begin, Index end) const;

 private:
  Index n_;
  Index d_;
  Index tiles_;
  // Candidates transposed in column tiles: tile t holds d rows of kTile
  // consecutive candidates, zero padded.
  std::vector<double> packed_;
};

}  // namespace xling::detail
