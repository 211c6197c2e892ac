#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xling {

// Row i is the vector of word i. Row-major so that row blocks are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EmbeddingMatrix = Matrix;
using Vector = Eigen::VectorXd;
using Index = std::ptrdiff_t;

struct WordPair {
  Index source = 0;
  Index target = 0;

  friend bool operator==(const WordPair&, const WordPair&) = default;
  friend auto operator<=>(const WordPair&, const WordPair&) = default;
};

// Ordered list of (source-index, target-index) pairs.
struct BilingualDictionary {
  std::vector<WordPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  friend bool operator==(const BilingualDictionary&, const BilingualDictionary&) = default;
};

enum class Direction { forward, backward, union_of_both };
enum class RetrievalMethod { nn, csls };

// Precondition violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A zero vector where a direction is required.
class DegenerateInputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Dictionary induction produced no pairs.
class AlignmentCollapseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

const char* to_string(Direction d);
const char* to_string(RetrievalMethod m);
Direction parse_direction(const std::string& s);
RetrievalMethod parse_retrieval_method(const std::string& s);

}  // namespace xling
