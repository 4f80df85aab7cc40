#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hiqa/corpus.hpp"
#include "hiqa/diagnostics.hpp"
#include "hiqa/embedder.hpp"

namespace hiqa {

/// Unit vectors over embedding_text, stored row-major.
struct VectorIndex {
  std::size_t dim = 0;
  std::vector<std::string> keys;
  std::vector<float> data;  // keys.size() * dim

  std::size_t size() const { return keys.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::optional<std::size_t> find(std::string_view key) const;

  bool operator==(const VectorIndex&) const = default;
};

/// One entry per segment whose embedding_text embeds to a nonzero vector.
VectorIndex build_vector_index(std::span<const CorpusSegment> segments, const Embedder& embedder,
                               Diagnostics* diagnostics = nullptr);

struct Posting {
  std::uint32_t doc = 0;  // ordinal into Bm25Index::keys
  std::uint32_t tf = 0;
  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 inverted index over case-folded alphanumeric tokens.
class Bm25Index {
 public:
  static constexpr double kDefaultK1 = 1.2;
  static constexpr double kDefaultB = 0.75;

  Bm25Index() = default;
  /// Takes ownership of already-counted data; throws DataError if it is inconsistent.
  Bm25Index(double k1, double b, std::vector<std::string> keys, std::vector<std::uint32_t> doc_lengths,
            std::map<std::string, std::vector<Posting>> postings);

  double k1() const { return k1_; }
  double b() const { return b_; }
  double avgdl() const { return avgdl_; }
  std::size_t corpus_size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
  std::optional<std::size_t> find(std::string_view key) const;

  /// ln(1 + (N - n + 0.5) / (n + 0.5)) with n the document frequency of term.
  double idf(std::string_view term) const;

  /// Score of every indexed segment, in key order. Query terms count with multiplicity.
  std::vector<double> score_all(std::string_view query) const;

  bool operator==(const Bm25Index& o) const {
    return k1_ == o.k1_ && b_ == o.b_ && keys_ == o.keys_ && doc_lengths_ == o.doc_lengths_ &&
           postings_ == o.postings_;
  }

 private:
  double term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const;

  double k1_ = kDefaultK1;
  double b_ = kDefaultB;
  double avgdl_ = 0.0;
  std::vector<std::string> keys_;
  std::vector<std::uint32_t> doc_lengths_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Throws InvalidParameter unless k1 > 0 and 0 <= b <= 1.
Bm25Index build_bm25_index(std::span<const CorpusSegment> segments, double k1 = Bm25Index::kDefaultK1,
                           double b = Bm25Index::kDefaultB);

/// Throws DataError for a key that is not indexed.
double bm25_score(const Bm25Index& index, std::string_view query, std::string_view key);

/// Finds critical keywords (named entities, part numbers) in text.
class KeywordExtractor {
 public:
  virtual ~KeywordExtractor() = default;
  virtual std::set<std::string> extract(std::string_view text) const = 0;
};

/// Whitespace words, stripped of surrounding punctuation, that mix letters
/// and digits ("CA-IS3641", "iPhone15"). Quantities such as "5V", "3.3V" or
/// "10mA" are not keywords. Output is case-folded.
class PatternKeywordExtractor final : public KeywordExtractor {
 public:
  std::set<std::string> extract(std::string_view text) const override;
};

/// Extractor output plus every user keyword whose token sequence occurs in text.
std::set<std::string> extract_keywords(std::string_view text, const KeywordExtractor& extractor,
                                       const std::set<std::string>& user_keywords = {});

struct KeywordTable {
  std::map<std::string, std::set<std::string>> keywords;  // segment key -> keywords
  bool operator==(const KeywordTable&) const = default;
};

KeywordTable build_keyword_table(std::span<const CorpusSegment> segments, const KeywordExtractor& extractor,
                                 const std::set<std::string>& user_keywords = {});

}  // namespace hiqa
