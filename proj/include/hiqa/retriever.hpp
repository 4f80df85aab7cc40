#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiqa/diagnostics.hpp"
#include "hiqa/embedder.hpp"
#include "hiqa/index.hpp"
#include "hiqa/index_store.hpp"

namespace hiqa {

struct RetrievalConfig {
  double alpha = 0.5;  // weight of the vector route, [0, 1]
  double beta = 0.1;   // weight of ln(1 + |C|), >= 0
  std::size_t top_k = 5;
  double gamma = 1.0;  // log-rank curve shape, > 0

  /// Throws InvalidParameter on any out-of-range field.
  void validate() const;
};

struct RankedResult {
  std::string segment_key;
  double score_v = 0.0;  // normalised vector score
  double score_r = 0.0;  // normalised BM25 score
  std::size_t keyword_hits = 0;
  double fused_score = 0.0;
  std::size_t rank = 0;  // 1-based
};

using ScoreMap = std::map<std::string, double>;
using HitMap = std::map<std::string, std::size_t>;

/// Raw cosine similarity between the query and every indexed vector.
/// An unembeddable query scores 0 everywhere. Throws DataError on a
/// dimension mismatch.
ScoreMap vector_route(std::string_view query, const VectorIndex& index, const Embedder& embedder,
                      Diagnostics* diagnostics = nullptr);

/// Raw BM25 score of every indexed segment.
ScoreMap bm25_route(std::string_view query, const Bm25Index& index);

/// |C| per segment: distinct keywords shared by query and segment.
HitMap keyword_route(std::string_view query, const KeywordTable& table, const KeywordExtractor& extractor,
                     const std::set<std::string>& user_keywords = {});

/// Min-max to [0, 1]; if every value is equal they all map to 0.5.
ScoreMap normalize_scores(const ScoreMap& raw);

/// alpha * v + (1 - alpha) * r + beta * ln(1 + hits)
double fused_score(double alpha, double beta, double score_v, double score_r, std::size_t hits);

/// Fuses normalised route scores over the union of keys (absent reads as 0)
/// and ranks every key. Ties go to the higher score_v, then the smaller key.
std::vector<RankedResult> fuse_and_rank(const ScoreMap& scores_v, const ScoreMap& scores_r, const HitMap& hits,
                                        const RetrievalConfig& cfg);

struct Retrieval {
  std::vector<RankedResult> ranking;  // every segment
  std::size_t top_k = 0;

  std::span<const RankedResult> top() const { return {ranking.data(), std::min(top_k, ranking.size())}; }
};

/// Multi-route retrieval over a loaded index bundle. Safe for concurrent
/// queries as long as the embedder and extractor are.
class Retriever {
 public:
  /// Throws DataError if the bundle's key universes disagree or the embedder
  /// does not match the one the index was built with.
  Retriever(const IndexBundle& bundle, const Embedder& embedder, const KeywordExtractor& extractor,
            std::set<std::string> user_keywords = {});

  Retrieval retrieve(std::string_view query, const RetrievalConfig& cfg,
                     const std::set<std::string>& extra_keywords = {}, Diagnostics* diagnostics = nullptr) const;

  const CorpusSegment& segment(std::string_view key) const;
  std::size_t corpus_size() const { return bundle_.segments.size(); }
  const IndexBundle& bundle() const { return bundle_; }

 private:
  const IndexBundle& bundle_;
  const Embedder& embedder_;
  const KeywordExtractor& extractor_;
  std::set<std::string> user_keywords_;
  std::map<std::string, std::size_t, std::less<>> by_key_;
};

/// Throws DataError naming keys present in one substrate but not the segment list.
void check_key_universe(const IndexBundle& bundle);

}  // namespace hiqa
