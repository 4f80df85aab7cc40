#include <doctest.h>

#include <cmath>
#include <random>

#include "hiqa/embedder.hpp"
#include "hiqa/error.hpp"
#include "hiqa/index_store.hpp"
#include "hiqa/retriever.hpp"
#include "oracles.hpp"
#include "segments.hpp"

using namespace hiqa;

namespace {

IndexBundle bundle_of(const std::vector<std::pair<std::string, std::string>>& items) {
  const auto segs = hiqa::testing::text_segments(items);
  const HashingEmbedder e;
  IndexBundle b;
  b.embedder_name = e.name();
  b.segments = segs;
  b.vectors = build_vector_index(segs, e);
  b.bm25 = build_bm25_index(segs);
  b.keywords = build_keyword_table(segs, PatternKeywordExtractor{});
  return b;
}

std::vector<std::string> order(const std::vector<RankedResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.segment_key);
  return out;
}

std::vector<std::string> order_by(const ScoreMap& m) {
  std::vector<std::pair<std::string, double>> v(m.begin(), m.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [k, _] : v) out.push_back(k);
  return out;
}

const std::vector<std::pair<std::string, std::string>> kItems = {
    {"a", "supply voltage range for the CA-IS3641 isolator"},
    {"b", "pin configuration and functions of the package"},
    {"c", "absolute maximum ratings supply voltage"},
    {"d", "ordering information for CA-IS3642 and CA-IS3641"},
    {"e", "layout guidelines ground plane"},
};

}  // namespace

TEST_CASE("fusion worked example") {
  CHECK(fused_score(0.5, 0.2, 0.8, 0.6, 3) == doctest::Approx(0.97726).epsilon(1e-6));
  CHECK(std::abs(fused_score(0.5, 0.2, 0.8, 0.6, 3) - (0.4 + 0.3 + 0.2 * std::log(4.0))) < 1e-15);
  CHECK(fused_score(0.3, 0.7, 0.1, 0.9, 0) == doctest::Approx(0.3 * 0.1 + 0.7 * 0.9));
}

TEST_CASE("min-max normalization") {
  CHECK(normalize_scores({{"a", 2}, {"b", 4}, {"c", 6}}) == ScoreMap{{"a", 0}, {"b", 0.5}, {"c", 1}});
  CHECK(normalize_scores({{"a", 7}, {"b", 7}}) == ScoreMap{{"a", 0.5}, {"b", 0.5}});
  CHECK(normalize_scores({{"a", 3}}) == ScoreMap{{"a", 0.5}});
  CHECK(normalize_scores({}).empty());
}

TEST_CASE("fuse_and_rank matches the selection oracle") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    ScoreMap v, r;
    HitMap c;
    std::vector<oracle::FusionInput> in;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = "k" + std::to_string(rng() % 1000) + "_" + std::to_string(i);
      // Coarse values force ties.
      const double sv = std::round(u(rng) * 4) / 4, sr = std::round(u(rng) * 4) / 4;
      const std::size_t hits = rng() % 3;
      v[key] = sv;
      r[key] = sr;
      if (hits) c[key] = hits;
      in.push_back({key, sv, sr, hits});
    }
    RetrievalConfig cfg;
    cfg.alpha = u(rng);
    cfg.beta = u(rng);
    const auto got = fuse_and_rank(v, r, c, cfg);
    const auto want = oracle::fuse(in, cfg.alpha, cfg.beta);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].segment_key == want[i].key);
      CHECK(std::abs(got[i].fused_score - want[i].score) <= 1e-12);
      CHECK(got[i].rank == i + 1);
    }
  }
}

TEST_CASE("alpha outside [0,1] is rejected") {
  RetrievalConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(fuse_and_rank({}, {}, {}, cfg), InvalidParameter);
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.alpha = 0.5;
  cfg.gamma = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("routes") {
  const auto b = bundle_of(kItems);
  const HashingEmbedder e;
  const auto v = vector_route(kItems[2].second, b.vectors, e);
  CHECK(v.at("doc#c") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(vector_route("x", VectorIndex{256, {}, {}}, e).empty());
  CHECK_THROWS_AS(vector_route("x", VectorIndex{8, {}, {}}, e), DataError);

  const auto hits = keyword_route("CA-IS3641 pinout", b.keywords, PatternKeywordExtractor{});
  CHECK(hits.at("doc#a") == 1);
  CHECK(hits.at("doc#d") == 1);
  CHECK(hits.count("doc#b") == 0);
  CHECK(keyword_route("CA-IS3641 CA-IS3642", b.keywords, PatternKeywordExtractor{}).at("doc#d") == 2);
  CHECK(keyword_route("no codes", b.keywords, PatternKeywordExtractor{}).empty());
}

TEST_CASE("retrieval properties") {
  const auto b = bundle_of(kItems);
  const HashingEmbedder e;
  const PatternKeywordExtractor px;
  const Retriever ret(b, e, px);
  const std::string q = "CA-IS3641 supply voltage";

  RetrievalConfig cfg;
  const auto first = ret.retrieve(q, cfg);
  CHECK(order(first.ranking) == order(ret.retrieve(q, cfg).ranking));
  REQUIRE(first.ranking.size() == kItems.size());
  std::vector<std::size_t> ranks;
  for (const auto& r : first.ranking) ranks.push_back(r.rank);
  CHECK(ranks == std::vector<std::size_t>{1, 2, 3, 4, 5});
  CHECK(first.top().size() == 5);

  cfg.top_k = 100;
  CHECK(ret.retrieve(q, cfg).top().size() == kItems.size());
  cfg.top_k = 2;
  CHECK(ret.retrieve(q, cfg).top().size() == 2);

  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  CHECK(order(ret.retrieve(q, cfg).ranking) == order_by(vector_route(q, b.vectors, e)));
  cfg.alpha = 0.0;
  const auto bm = ret.retrieve(q, cfg).ranking;
  const auto bm_scores = bm25_route(q, b.bm25);
  for (std::size_t i = 1; i < bm.size(); ++i) CHECK(bm_scores.at(bm[i - 1].segment_key) >= bm_scores.at(bm[i].segment_key));
}

TEST_CASE("more keyword hits never worsen a rank") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMap v, r;
    HitMap c;
    for (int i = 0; i < 8; ++i) {
      const std::string k = "k" + std::to_string(i);
      v[k] = u(rng);
      r[k] = u(rng);
      c[k] = rng() % 3;
    }
    RetrievalConfig cfg;
    cfg.alpha = u(rng);
    cfg.beta = 0.01 + u(rng);
    auto rank_of = [&](const HitMap& hits) {
      for (const auto& res : fuse_and_rank(v, r, hits, cfg))
        if (res.segment_key == "k3") return res.rank;
      return std::size_t{0};
    };
    const auto before = rank_of(c);
    c["k3"] += 1 + rng() % 3;
    CHECK(rank_of(c) <= before);
  }
}

TEST_CASE("single segment corpus ranks it first") {
  const auto b = bundle_of({{"only", "lonely text"}});
  const HashingEmbedder e;
  const PatternKeywordExtractor px;
  const auto res = Retriever(b, e, px).retrieve("unrelated", {});
  REQUIRE(res.ranking.size() == 1);
  CHECK(res.ranking[0].rank == 1);
}

TEST_CASE("inconsistent key universes name the missing keys") {
  auto b = bundle_of(kItems);
  b.vectors.keys.push_back("doc#ghost");
  b.vectors.data.resize(b.vectors.data.size() + b.vectors.dim, 0.0f);
  const HashingEmbedder e;
  const PatternKeywordExtractor px;
  try {
    Retriever ret(b, e, px);
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find("doc#ghost") != std::string::npos);
  }
  auto c = bundle_of(kItems);
  c.segments.pop_back();
  CHECK_THROWS_AS(Retriever(c, e, px), DataError);
  auto d = bundle_of(kItems);
  d.embedder_name = "other";
  CHECK_THROWS_AS(Retriever(d, e, px), DataError);
}
