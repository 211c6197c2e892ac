#pragma once

#include "xling/types.h"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xling {

// Ordered word list with an exact inverse lookup. Words are unique and
// non-empty; comparison is byte-wise.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws ContractError on duplicate or empty words.
  explicit Vocabulary(std::vector<std::string> words);

  // Appends a word. Returns false (and does nothing) if it is already present.
  bool add(std::string word);

  std::optional<Index> find(std::string_view word) const;
  const std::string& word(Index i) const { return words_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& words() const { return words_; }
  Index size() const { return static_cast<Index>(words_.size()); }
  bool empty() const { return words_.empty(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Index> index_;
};

struct LoadedEmbeddings {
  Vocabulary vocab;
  EmbeddingMatrix matrix;
  Index duplicates_dropped = 0;
};

// Word2vec text format: a header "n d", then n lines "word x_1 ... x_d".
// Duplicate words keep their first row. Binary files are rejected.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path,
                                 std::optional<Index> max_vocab = std::nullopt);

// Writes single-space separated rows using the shortest decimal form that
// reads back to the same double.
void save_embeddings(const Vocabulary& vocab, const EmbeddingMatrix& emb,
                     const std::filesystem::path& path);

// Source index -> set of acceptable target indices.
struct GoldDictionary {
  std::map<Index, std::set<Index>> entries;
  // Gold source words missing from the source vocabulary.
  Index oov_sources = 0;
  // Source words that were present but lost every target to target-side OOV.
  Index excluded_sources = 0;

  bool empty() const { return entries.empty(); }
};

GoldDictionary load_gold_dictionary(const std::filesystem::path& path, const Vocabulary& src,
                                    const Vocabulary& trg);

// Pair files use the same "src_word trg_word" line format as gold dictionaries.
BilingualDictionary load_pair_dictionary(const std::filesystem::path& path, const Vocabulary& src,
                                         const Vocabulary& trg);
void save_pair_dictionary(const BilingualDictionary& dict, const Vocabulary& src,
                          const Vocabulary& trg, const std::filesystem::path& path);

}  // namespace xling
