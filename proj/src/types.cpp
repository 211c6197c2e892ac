#include "xling/types.h"

namespace xling {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::union_of_both: return "union";
  }
  return "?";
}

const char* to_string(RetrievalMethod m) {
  return m == RetrievalMethod::nn ? "nn" : "csls";
}

Direction parse_direction(const std::string& s) {
  if (s == "forward") return Direction::forward;
  if (s == "backward") return Direction::backward;
  if (s == "union" || s == "union-of-both") return Direction::union_of_both;
  throw ContractError("unknown direction '" + s + "' (expected forward, backward or union)");
}

RetrievalMethod parse_retrieval_method(const std::string& s) {
  if (s == "nn") return RetrievalMethod::nn;
  if (s == "csls") return RetrievalMethod::csls;
  throw ContractError("unknown retrieval method '" + s + "' (expected nn or csls)");
}

}  // namespace xling
