#include "xling/embed_io.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

namespace xling {

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& value) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

void check_text_line(const std::filesystem::path& path, std::size_t line_no, std::string_view line) {
  if (line.find('\0') != std::string_view::npos || !valid_utf8(line)) {
    throw FormatError(fmt::format(
        "{}:{}: line is not valid UTF-8 text (binary embedding files are not supported)",
        path.string(), line_no));
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (auto& w : words) {
    if (w.empty()) throw ContractError("vocabulary words must be non-empty");
    if (!add(std::move(w))) throw ContractError("duplicate vocabulary word");
  }
}

bool Vocabulary::add(std::string word) {
  if (word.empty()) throw ContractError("vocabulary words must be non-empty");
  auto [it, inserted] = index_.emplace(word, size());
  if (!inserted) return false;
  words_.push_back(std::move(word));
  return true;
}

std::optional<Index> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path, std::optional<Index> max_vocab) {
  if (max_vocab && *max_vocab < 1) throw ContractError("max_vocab must be positive");
  auto in = open_input(path);

  std::string line;
  if (!std::getline(in, line)) throw FormatError(fmt::format("{}: empty file", path.string()));
  strip_cr(line);
  check_text_line(path, 1, line);
  const auto header = split_ws(line);
  long long n = 0;
  long long d = 0;
  if (header.size() != 2 || !parse_number(header[0], n) || !parse_number(header[1], d) || n < 0 ||
      d < 1) {
    throw FormatError(fmt::format("{}:1: malformed header '{}' (expected \"n d\")", path.string(), line));
  }

  const Index wanted = max_vocab ? std::min<Index>(n, *max_vocab) : static_cast<Index>(n);
  LoadedEmbeddings out;
  out.matrix.resize(wanted, d);
  std::size_t line_no = 1;
  long long rows_read = 0;
  while (out.vocab.size() < wanted && rows_read < n) {
    if (!std::getline(in, line)) {
      throw FormatError(fmt::format("{}: header declares {} rows but the file ends after {}",
                                    path.string(), n, rows_read));
    }
    ++line_no;
    strip_cr(line);
    check_text_line(path, line_no, line);
    const auto tokens = split_ws(line);
    if (tokens.empty()) {
      throw FormatError(fmt::format("{}:{}: empty row", path.string(), line_no));
    }
    if (static_cast<long long>(tokens.size()) - 1 != d) {
      throw FormatError(fmt::format("{}:{}: expected {} numbers, found {}", path.string(), line_no, d,
                                    tokens.size() - 1));
    }
    ++rows_read;
    const Index row = out.vocab.size();
    for (long long j = 0; j < d; ++j) {
      double v = 0.0;
      const auto tok = tokens[static_cast<std::size_t>(j + 1)];
      if (!parse_number(tok, v)) {
        throw FormatError(fmt::format("{}:{}: cannot parse number '{}'", path.string(), line_no, tok));
      }
      if (!std::isfinite(v)) {
        throw FormatError(fmt::format("{}:{}: non-finite value '{}'", path.string(), line_no, tok));
      }
      out.matrix(row, j) = v;
    }
    if (!out.vocab.add(std::string(tokens[0]))) {
      ++out.duplicates_dropped;
      spdlog::warn("{}:{}: duplicate word '{}' ignored (first occurrence kept)", path.string(), line_no,
                   tokens[0]);
    }
  }
  if (rows_read == n) {
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (!split_ws(line).empty()) {
        throw FormatError(
            fmt::format("{}:{}: more rows than the header declares ({})", path.string(), line_no, n));
      }
    }
  }
  out.matrix.conservativeResize(out.vocab.size(), d);
  return out;
}

void save_embeddings(const Vocabulary& vocab, const EmbeddingMatrix& emb,
                     const std::filesystem::path& path) {
  if (vocab.size() != emb.rows()) {
    throw ContractError(fmt::format("vocabulary has {} words but the matrix has {} rows", vocab.size(),
                                    emb.rows()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{} {}\n", emb.rows(), emb.cols());
  for (Index i = 0; i < emb.rows(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{}", vocab.word(i));
    for (Index j = 0; j < emb.cols(); ++j) fmt::format_to(std::back_inserter(buf), " {}", emb(i, j));
    buf.push_back('\n');
    if (buf.size() > (1 << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

namespace {

template <class OnPair>
void read_pair_lines(const std::filesystem::path& path, OnPair&& on_pair) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    check_text_line(path, line_no, line);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw FormatError(fmt::format("{}:{}: expected \"source target\", found {} tokens", path.string(),
                                    line_no, tokens.size()));
    }
    on_pair(tokens[0], tokens[1]);
  }
}

}  // namespace

GoldDictionary load_gold_dictionary(const std::filesystem::path& path, const Vocabulary& src,
                                    const Vocabulary& trg) {
  GoldDictionary gold;
  std::set<std::string, std::less<>> oov_words;
  std::set<Index> seen_sources;
  read_pair_lines(path, [&](std::string_view s, std::string_view t) {
    const auto si = src.find(s);
    if (!si) {
      // A source word counts once however many lines mention it.
      if (oov_words.emplace(s).second) ++gold.oov_sources;
      return;
    }
    seen_sources.insert(*si);
    if (const auto ti = trg.find(t)) gold.entries[*si].insert(*ti);
  });
  gold.excluded_sources = static_cast<Index>(seen_sources.size() - gold.entries.size());
  if (gold.excluded_sources > 0) {
    spdlog::info("{}: {} source words excluded because none of their targets are in the target vocabulary",
                 path.string(), gold.excluded_sources);
  }
  return gold;
}

BilingualDictionary load_pair_dictionary(const std::filesystem::path& path, const Vocabulary& src,
                                         const Vocabulary& trg) {
  BilingualDictionary dict;
  Index skipped = 0;
  read_pair_lines(path, [&](std::string_view s, std::string_view t) {
    const auto si = src.find(s);
    const auto ti = trg.find(t);
    if (si && ti) {
      dict.pairs.push_back({*si, *ti});
    } else {
      ++skipped;
    }
  });
  if (skipped > 0) spdlog::warn("{}: {} pairs with out-of-vocabulary words skipped", path.string(), skipped);
  return dict;
}

void save_pair_dictionary(const BilingualDictionary& dict, const Vocabulary& src, const Vocabulary& trg,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& p : dict.pairs) out << src.word(p.source) << ' ' << trg.word(p.target) << '\n';
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace xling
