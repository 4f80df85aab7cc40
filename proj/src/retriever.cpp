#include "hiqa/retriever.hpp"

#include <algorithm>
#include <cmath>

#include "hiqa/error.hpp"
#include "hiqa/simd/kernels.hpp"

namespace hiqa {

void RetrievalConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must be in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be >= 0");
  if (top_k < 1) throw InvalidParameter("top_k must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be > 0");
}

ScoreMap vector_route(std::string_view query, const VectorIndex& index, const Embedder& embedder,
                      Diagnostics* diagnostics) {
  if (embedder.dim() != index.dim) {
    throw DataError("embedder dimension " + std::to_string(embedder.dim()) + " does not match index dimension " +
                    std::to_string(index.dim));
  }
  ScoreMap out;
  if (index.size() == 0) return out;
  const Embedding q = embedder.embed(query);
  std::vector<double> sims(index.size(), 0.0);
  if (q.embeddable) {
    simd::dot_rows(index.data, index.dim, q.values, sims);
  } else {
    warn(diagnostics, "query has no embeddable tokens; vector scores are all zero");
  }
  for (std::size_t i = 0; i < index.size(); ++i) out.emplace(index.keys[i], sims[i]);
  return out;
}

ScoreMap bm25_route(std::string_view query, const Bm25Index& index) {
  ScoreMap out;
  const auto scores = index.score_all(query);
  for (std::size_t i = 0; i < scores.size(); ++i) out.emplace(index.keys()[i], scores[i]);
  return out;
}

HitMap keyword_route(std::string_view query, const KeywordTable& table, const KeywordExtractor& extractor,
                     const std::set<std::string>& user_keywords) {
  const auto query_keywords = extract_keywords(query, extractor, user_keywords);
  HitMap out;
  if (query_keywords.empty()) return out;
  for (const auto& [key, kws] : table.keywords) {
    std::size_t hits = 0;
    for (const auto& k : query_keywords) hits += kws.count(k);
    if (hits) out.emplace(key, hits);
  }
  return out;
}

ScoreMap normalize_scores(const ScoreMap& raw) {
  ScoreMap out;
  if (raw.empty()) return out;
  const auto [lo_it, hi_it] =
      std::minmax_element(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  const double lo = lo_it->second;
  const double span = hi_it->second - lo;
  for (const auto& [key, value] : raw) out.emplace_hint(out.end(), key, span > 0.0 ? (value - lo) / span : 0.5);
  return out;
}

double fused_score(double alpha, double beta, double score_v, double score_r, std::size_t hits) {
  return alpha * score_v + (1.0 - alpha) * score_r + beta * std::log(1.0 + static_cast<double>(hits));
}

std::vector<RankedResult> fuse_and_rank(const ScoreMap& scores_v, const ScoreMap& scores_r, const HitMap& hits,
                                        const RetrievalConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InvalidParameter("alpha must be in [0, 1]");
  if (!(cfg.beta >= 0.0)) throw InvalidParameter("beta must be >= 0");

  std::map<std::string, RankedResult> merged;
  for (const auto& [k, v] : scores_v) merged[k].score_v = v;
  for (const auto& [k, r] : scores_r) merged[k].score_r = r;
  for (const auto& [k, c] : hits) merged[k].keyword_hits = c;

  std::vector<RankedResult> out;
  out.reserve(merged.size());
  for (auto& [key, result] : merged) {
    result.segment_key = key;
    result.fused_score = fused_score(cfg.alpha, cfg.beta, result.score_v, result.score_r, result.keyword_hits);
    out.push_back(std::move(result));
  }
  std::sort(out.begin(), out.end(), [](const RankedResult& a, const RankedResult& b) {
    if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
    if (a.score_v != b.score_v) return a.score_v > b.score_v;
    return a.segment_key < b.segment_key;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

void check_key_universe(const IndexBundle& bundle) {
  std::set<std::string> universe;
  for (const auto& cs : bundle.segments) universe.insert(cs.key());

  std::vector<std::string> problems;
  auto report = [&](const std::string& where, const std::vector<std::string>& keys) {
    if (keys.empty()) return;
    std::string msg = where + ":";
    for (std::size_t i = 0; i < keys.size() && i < 10; ++i) msg += " " + keys[i];
    if (keys.size() > 10) msg += " (+" + std::to_string(keys.size() - 10) + " more)";
    problems.push_back(msg);
  };

  std::vector<std::string> missing;
  const std::set<std::string> bm25(bundle.bm25.keys().begin(), bundle.bm25.keys().end());
  std::set_difference(universe.begin(), universe.end(), bm25.begin(), bm25.end(), std::back_inserter(missing));
  report("segments missing from the BM25 index", missing);
  missing.clear();
  std::set_difference(bm25.begin(), bm25.end(), universe.begin(), universe.end(), std::back_inserter(missing));
  report("BM25 keys without a segment", missing);
  missing.clear();
  for (const auto& k : bundle.vectors.keys) {
    if (!universe.count(k)) missing.push_back(k);
  }
  report("vector keys without a segment", missing);
  missing.clear();
  for (const auto& [k, _] : bundle.keywords.keywords) {
    if (!universe.count(k)) missing.push_back(k);
  }
  report("keyword keys without a segment", missing);

  if (!problems.empty()) {
    std::string msg = "inconsistent index key universes; ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw DataError(msg);
  }
}

Retriever::Retriever(const IndexBundle& bundle, const Embedder& embedder, const KeywordExtractor& extractor,
                     std::set<std::string> user_keywords)
    : bundle_(bundle), embedder_(embedder), extractor_(extractor), user_keywords_(std::move(user_keywords)) {
  check_key_universe(bundle_);
  if (!bundle_.embedder_name.empty() && bundle_.embedder_name != embedder_.name()) {
    throw DataError("index was built with embedder '" + bundle_.embedder_name + "', not '" + embedder_.name() + "'");
  }
  for (std::size_t i = 0; i < bundle_.segments.size(); ++i) by_key_.emplace(bundle_.segments[i].key(), i);
}

const CorpusSegment& Retriever::segment(std::string_view key) const {
  const auto it = by_key_.find(key);
  if (it == by_key_.end()) throw DataError("unknown segment key '" + std::string(key) + "'");
  return bundle_.segments[it->second];
}

Retrieval Retriever::retrieve(std::string_view query, const RetrievalConfig& cfg,
                              const std::set<std::string>& extra_keywords, Diagnostics* diagnostics) const {
  cfg.validate();
  std::set<std::string> keywords = user_keywords_;
  keywords.insert(extra_keywords.begin(), extra_keywords.end());

  const ScoreMap v = normalize_scores(vector_route(query, bundle_.vectors, embedder_, diagnostics));
  const ScoreMap r = normalize_scores(bm25_route(query, bundle_.bm25));
  const HitMap c = keyword_route(query, bundle_.keywords, extractor_, keywords);
  return Retrieval{fuse_and_rank(v, r, c, cfg), cfg.top_k};
}

}  // namespace hiqa
