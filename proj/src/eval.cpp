#include "xling/eval.h"

#include "parallel.h"
#include "similarity.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace xling {

std::vector<std::vector<Index>> rank_top_k(const Matrix& x_space, const Matrix& z_space,
                                           const std::vector<Index>& queries, int k,
                                           RetrievalMethod method, int csls_k,
                                           const RetrievalOptions& opts) {
  if (x_space.cols() != z_space.cols()) throw ContractError("rank_top_k: dimension mismatch");
  if (k < 1 || k > z_space.rows()) {
    throw ContractError(fmt::format("rank_top_k: k={} outside [1, {}]", k, z_space.rows()));
  }
  for (Index q : queries) {
    if (q < 0 || q >= x_space.rows()) throw ContractError(fmt::format("rank_top_k: query {} out of range", q));
  }
  const bool csls = method == RetrievalMethod::csls;
  if (csls && (csls_k < 1 || csls_k > z_space.rows() - 1 || csls_k > x_space.rows())) {
    throw ContractError(fmt::format("rank_top_k: csls_k={} out of range", csls_k));
  }

  const Matrix x = normalized_rows(x_space);
  const Matrix z = normalized_rows(z_space);
  const auto n = static_cast<Index>(queries.size());
  Matrix q(n, x.cols());
  for (Index i = 0; i < n; ++i) q.row(i) = x.row(queries[static_cast<std::size_t>(i)]);
  Vector r_t;
  Vector r_s;
  if (csls) {
    r_t = mean_topk_similarity(q, z, csls_k, opts);
    r_s = mean_topk_similarity(z, x, csls_k, opts);
  }

  std::vector<std::vector<Index>> out(queries.size());
  const detail::CandidatePanel panel(z);
  detail::for_each_block(n, opts.block_size, opts.threads, [&](Index begin, Index end) {
    Matrix scores = panel.scores(q, begin, end);
    std::vector<Index> order(static_cast<std::size_t>(z.rows()));
    for (Index i = begin; i < end; ++i) {
      auto row = scores.row(i - begin);
      if (csls) {
        for (Index j = 0; j < row.size(); ++j) row(j) = 2.0 * row(j) - r_t(i) - r_s(j);
      }
      std::iota(order.begin(), order.end(), Index{0});
      std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        return row(a) > row(b) || (row(a) == row(b) && a < b);
      });
      out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
    }
  });
  return out;
}

EvalReport precision_at_k(const Matrix& x_space, const Matrix& z_space, const GoldDictionary& gold,
                          const EvalSettings& settings) {
  if (gold.empty()) throw ContractError("precision_at_k: empty gold dictionary");
  if (settings.ks.empty()) throw ContractError("precision_at_k: no k values");
  for (int k : settings.ks) {
    if (k < 1) throw ContractError("precision_at_k: k must be >= 1");
  }
  const int max_k = *std::max_element(settings.ks.begin(), settings.ks.end());
  if (max_k > z_space.rows()) {
    throw ContractError(fmt::format("precision_at_k: k={} exceeds target vocabulary size {}", max_k,
                                    z_space.rows()));
  }

  std::vector<Index> sources;
  sources.reserve(gold.entries.size());
  for (const auto& [src, targets] : gold.entries) sources.push_back(src);
  const auto ranked = rank_top_k(x_space, z_space, sources, max_k, settings.method, settings.csls_k,
                                 settings.retrieval_options);

  // First rank (1-based) at which a gold target appears; 0 if none in top max_k.
  std::vector<int> first_hit(sources.size(), 0);
  std::size_t i = 0;
  for (const auto& [src, targets] : gold.entries) {
    const auto& top = ranked[i];
    for (std::size_t r = 0; r < top.size(); ++r) {
      if (targets.contains(top[r])) {
        first_hit[i] = static_cast<int>(r) + 1;
        break;
      }
    }
    ++i;
  }

  EvalReport report;
  report.evaluated_sources = static_cast<Index>(sources.size());
  report.oov_sources = gold.oov_sources;
  report.excluded_sources = gold.excluded_sources;
  report.coverage = static_cast<double>(report.evaluated_sources) /
                    static_cast<double>(report.evaluated_sources + report.oov_sources);
  for (int k : settings.ks) {
    const auto correct = std::count_if(first_hit.begin(), first_hit.end(), [k](int r) { return r > 0 && r <= k; });
    report.precision_at[k] = static_cast<double>(correct) / static_cast<double>(report.evaluated_sources);
  }
  return report;
}

ComparisonTable compare_reports(const std::vector<NamedReport>& reports, const std::string& baseline) {
  auto base = std::find_if(reports.begin(), reports.end(), [&](const NamedReport& r) { return r.name == baseline; });
  if (base == reports.end()) throw ContractError(fmt::format("compare_reports: unknown baseline '{}'", baseline));
  ComparisonTable table;
  table.baseline = baseline;
  for (const auto& [k, p] : base->report.precision_at) table.ks.push_back(k);
  for (const auto& r : reports) {
    if (r.report.precision_at.size() != table.ks.size()) {
      throw ContractError(fmt::format("compare_reports: system '{}' has a different k set", r.name));
    }
    ComparisonRow row{r.name, {}, {}};
    for (int k : table.ks) {
      auto it = r.report.precision_at.find(k);
      if (it == r.report.precision_at.end()) {
        throw ContractError(fmt::format("compare_reports: system '{}' has no P@{}", r.name, k));
      }
      row.percent[k] = it->second * 100.0;
      row.delta[k] = (it->second - base->report.precision_at.at(k)) * 100.0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_delta(double delta_points, int decimals) {
  if (std::abs(delta_points) < 0.5 * std::pow(10.0, -decimals)) return fmt::format("{:.{}f}", 0.0, decimals);
  return fmt::format("{:+.{}f}", delta_points, decimals);
}

std::string format_table(const ComparisonTable& table, int decimals) {
  if (decimals != 1 && decimals != 2) throw ContractError("format_table: decimals must be 1 or 2");
  std::size_t name_width = 6;
  for (const auto& r : table.rows) name_width = std::max(name_width, r.system.size());
  std::string out = fmt::format("{:<{}}", "system", name_width);
  for (int k : table.ks) out += fmt::format("  {:>8}  {:>8}", fmt::format("P@{}", k), fmt::format("d@{}", k));
  out += '\n';
  for (const auto& r : table.rows) {
    out += fmt::format("{:<{}}", r.system, name_width);
    for (int k : table.ks) {
      out += fmt::format("  {:>8.{}f}  {:>8}", r.percent.at(k), decimals, format_delta(r.delta.at(k), decimals));
    }
    out += '\n';
  }
  return out;
}

std::string format_key_values(const std::string& system, const EvalReport& report) {
  std::string out;
  for (const auto& [k, p] : report.precision_at) out += fmt::format("{}.p@{}={:.17g}\n", system, k, p);
  out += fmt::format("{}.evaluated_sources={}\n", system, report.evaluated_sources);
  out += fmt::format("{}.oov_sources={}\n", system, report.oov_sources);
  out += fmt::format("{}.excluded_sources={}\n", system, report.excluded_sources);
  out += fmt::format("{}.coverage={:.17g}\n", system, report.coverage);
  return out;
}

EvalReport parse_key_values(const std::string& text, const std::string& system) {
  EvalReport report;
  std::istringstream in(text);
  std::string line;
  const std::string prefix = system + ".";
  bool any = false;
  while (std::getline(in, line)) {
    if (!line.starts_with(prefix)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("report line without '=': " + line);
    const std::string key = line.substr(prefix.size(), eq - prefix.size());
    const std::string value = line.substr(eq + 1);
    try {
      if (key.starts_with("p@")) {
        report.precision_at[std::stoi(key.substr(2))] = std::stod(value);
      } else if (key == "evaluated_sources") {
        report.evaluated_sources = std::stoll(value);
      } else if (key == "oov_sources") {
        report.oov_sources = std::stoll(value);
      } else if (key == "excluded_sources") {
        report.excluded_sources = std::stoll(value);
      } else if (key == "coverage") {
        report.coverage = std::stod(value);
      } else {
        throw FormatError("unknown report key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw FormatError("malformed report line: " + line);
    }
    any = true;
  }
  if (!any) throw FormatError(fmt::format("no report lines for system '{}'", system));
  return report;
}

}  // namespace xling
