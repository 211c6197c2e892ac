#pragma once

#include "xling/embed_io.h"
#include "xling/retrieval.h"
#include "xling/types.h"

#include <map>
#include <string>
#include <vector>

namespace xling {

struct EvalReport {
  std::map<int, double> precision_at;
  Index evaluated_sources = 0;
  Index oov_sources = 0;
  Index excluded_sources = 0;
  double coverage = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalSettings {
  std::vector<int> ks{1, 5, 10};
  RetrievalMethod method = RetrievalMethod::csls;
  int csls_k = kDefaultCslsK;
  RetrievalOptions retrieval_options{};
};

// Top-k targets for every gold source, ranked forward (source -> target) by
// the chosen score; a source is correct at k if any gold target is in its
// top k.
EvalReport precision_at_k(const Matrix& x_space, const Matrix& z_space, const GoldDictionary& gold,
                          const EvalSettings& settings);

// Indices of the k best candidates for each query in descending score order,
// lowest index first among equal scores.
std::vector<std::vector<Index>> rank_top_k(const Matrix& x_space, const Matrix& z_space,
                                           const std::vector<Index>& queries, int k,
                                           RetrievalMethod method, int csls_k,
                                           const RetrievalOptions& opts = {});

struct NamedReport {
  std::string name;
  EvalReport report;
};

struct ComparisonRow {
  std::string system;
  // k -> P@k x 100
  std::map<int, double> percent;
  // k -> percentage-point difference to the baseline
  std::map<int, double> delta;
};

struct ComparisonTable {
  std::vector<int> ks;
  std::string baseline;
  std::vector<ComparisonRow> rows;
};

ComparisonTable compare_reports(const std::vector<NamedReport>& reports, const std::string& baseline);

// Aligned plain-text table. decimals is 1 or 2.
std::string format_table(const ComparisonTable& table, int decimals = 2);
// Signed difference as printed in delta columns: "+0.20", "-1.14", "0.00".
std::string format_delta(double delta_points, int decimals = 2);

// One "system.key=value" line per field.
std::string format_key_values(const std::string& system, const EvalReport& report);
// Parses the lines written by format_key_values. Lines of other systems are
// ignored.
EvalReport parse_key_values(const std::string& text, const std::string& system);

}  // namespace xling
