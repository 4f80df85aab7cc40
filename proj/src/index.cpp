#include "hiqa/index.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "hiqa/error.hpp"
#include "hiqa/text.hpp"

namespace hiqa {

std::optional<std::size_t> VectorIndex::find(std::string_view key) const {
  const auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) return std::nullopt;
  return static_cast<std::size_t>(it - keys.begin());
}

VectorIndex build_vector_index(std::span<const CorpusSegment> segments, const Embedder& embedder,
                               Diagnostics* diagnostics) {
  VectorIndex index;
  index.dim = embedder.dim();
  for (const auto& cs : segments) {
    const std::string key = cs.key();
    if (!cs.segment.vector_indexable) {
      warn(diagnostics, key + ": not vector-indexable, skipped");
      continue;
    }
    Embedding e = embedder.embed(cs.segment.embedding_text);
    if (!e.embeddable) {
      warn(diagnostics, key + ": unembeddable text, skipped");
      continue;
    }
    if (e.values.size() != index.dim) throw DataError("embedder returned a vector of the wrong dimension");
    index.keys.push_back(key);
    index.data.insert(index.data.end(), e.values.begin(), e.values.end());
  }
  return index;
}

Bm25Index::Bm25Index(double k1, double b, std::vector<std::string> keys, std::vector<std::uint32_t> doc_lengths,
                     std::map<std::string, std::vector<Posting>> postings)
    : k1_(k1), b_(b), keys_(std::move(keys)), doc_lengths_(std::move(doc_lengths)), postings_(std::move(postings)) {
  if (!(k1_ > 0.0) || !(b_ >= 0.0 && b_ <= 1.0)) throw InvalidParameter("BM25 requires k1 > 0 and 0 <= b <= 1");
  if (keys_.size() != doc_lengths_.size()) throw DataError("BM25 keys and document lengths differ in count");
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!lookup_.emplace(keys_[i], i).second) throw DataError("duplicate BM25 key '" + keys_[i] + "'");
  }
  for (const auto& [term, list] : postings_) {
    for (const auto& p : list) {
      if (p.doc >= keys_.size() || p.tf == 0) throw DataError("invalid posting for term '" + term + "'");
    }
  }
  double total = 0.0;
  for (auto len : doc_lengths_) total += len;
  avgdl_ = keys_.empty() ? 0.0 : total / static_cast<double>(keys_.size());
}

std::optional<std::size_t> Bm25Index::find(std::string_view key) const {
  const auto it = lookup_.find(std::string(key));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double Bm25Index::idf(std::string_view term) const {
  const auto it = postings_.find(std::string(term));
  const double n = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double big_n = static_cast<double>(keys_.size());
  return std::log(1.0 + (big_n - n + 0.5) / (n + 0.5));
}

double Bm25Index::term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const {
  const double f = tf;
  const double norm = 1.0 - b_ + b_ * static_cast<double>(doc_length) / avgdl_;
  return idf * (f * (k1_ + 1.0)) / (f + k1_ * norm);
}

std::vector<double> Bm25Index::score_all(std::string_view query) const {
  std::vector<double> scores(keys_.size(), 0.0);
  if (keys_.empty()) return scores;
  for (const auto& term : text::alnum_tokens(query)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) scores[p.doc] += term_weight(w, p.tf, doc_lengths_[p.doc]);
  }
  return scores;
}

Bm25Index build_bm25_index(std::span<const CorpusSegment> segments, double k1, double b) {
  if (!(k1 > 0.0) || !(b >= 0.0 && b <= 1.0)) throw InvalidParameter("BM25 requires k1 > 0 and 0 <= b <= 1");
  std::vector<std::string> keys;
  std::vector<std::uint32_t> lengths;
  std::map<std::string, std::vector<Posting>> postings;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    keys.push_back(segments[i].key());
    const auto tokens = text::alnum_tokens(segments[i].segment.embedding_text);
    lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) postings[term].push_back({static_cast<std::uint32_t>(i), count});
  }
  return Bm25Index(k1, b, std::move(keys), std::move(lengths), std::move(postings));
}

double bm25_score(const Bm25Index& index, std::string_view query, std::string_view key) {
  const auto doc = index.find(key);
  if (!doc) throw DataError("segment key '" + std::string(key) + "' is not in the BM25 index");
  double score = 0.0;
  for (const auto& term : text::alnum_tokens(query)) {
    const auto it = index.postings().find(term);
    if (it == index.postings().end()) continue;
    const auto p = std::find_if(it->second.begin(), it->second.end(),
                                [&](const Posting& x) { return x.doc == *doc; });
    if (p == it->second.end()) continue;
    const double f = p->tf;
    const double norm = 1.0 - index.b() + index.b() * static_cast<double>(index.doc_lengths()[*doc]) / index.avgdl();
    score += index.idf(term) * (f * (index.k1() + 1.0)) / (f + index.k1() * norm);
  }
  return score;
}

namespace {

bool is_edge_punct(char c) {
  static constexpr std::string_view kPunct = "()[]{}<>,.;:!?\"'`*_~|/\\";
  return kPunct.find(c) != std::string_view::npos;
}

bool is_quantity(std::string_view word) {
  static const std::regex quantity(R"(^[+\-±~]?[0-9][0-9.,]*[a-zA-Z%°]{1,3}$)");
  return std::regex_match(word.begin(), word.end(), quantity);
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::set<std::string> PatternKeywordExtractor::extract(std::string_view input) const {
  std::set<std::string> out;
  for (const auto& w : text::split_words(input)) {
    std::string_view word = input.substr(w.begin, w.end - w.begin);
    while (!word.empty() && (is_edge_punct(word.front()) || word.front() == '-')) word.remove_prefix(1);
    while (!word.empty() && (is_edge_punct(word.back()) || word.back() == '-')) word.remove_suffix(1);
    if (word.empty() || !text::has_letter(word) || !text::has_digit(word) || is_quantity(word)) continue;
    out.insert(text::casefold(word));
  }
  return out;
}

std::set<std::string> extract_keywords(std::string_view text, const KeywordExtractor& extractor,
                                       const std::set<std::string>& user_keywords) {
  std::set<std::string> out;
  for (auto& k : extractor.extract(text)) {
    if (!k.empty()) out.insert(text::casefold(k));
  }
  if (!user_keywords.empty()) {
    const auto tokens = text::alnum_tokens(text);
    for (const auto& kw : user_keywords) {
      if (contains_sequence(tokens, text::alnum_tokens(kw))) out.insert(text::casefold(text::trim(kw)));
    }
  }
  return out;
}

KeywordTable build_keyword_table(std::span<const CorpusSegment> segments, const KeywordExtractor& extractor,
                                 const std::set<std::string>& user_keywords) {
  KeywordTable table;
  for (const auto& cs : segments) {
    auto kws = extract_keywords(cs.segment.embedding_text, extractor, user_keywords);
    if (!kws.empty()) table.keywords.emplace(cs.key(), std::move(kws));
  }
  return table;
}

}  // namespace hiqa
