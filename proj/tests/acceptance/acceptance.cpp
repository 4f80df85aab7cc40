// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails or exceeds its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hiqa/embedder.hpp"
#include "hiqa/evalkit.hpp"
#include "hiqa/formatter.hpp"
#include "hiqa/hca.hpp"
#include "hiqa/index_store.hpp"
#include "hiqa/pipeline.hpp"
#include "hiqa/retriever.hpp"
#include "hiqa/simd/kernels.hpp"
#include "hiqa/text.hpp"
#include "oracles.hpp"
#include "segments.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace hiqa;
using hiqa::testing::TempDir;

namespace {

/// Collects failure messages for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string detail;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() >= 5 && failures.back() != "...") failures.push_back("...");
  }
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- C1 ----

void log_rank_exactness(Check& c) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ug(0.001, 100.0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 10000;
    const double g = ug(rng);
    c.expect(log_rank_score(1, n, g) == 1.0, "S(1) != 1 at N=" + std::to_string(n));
    c.expect(log_rank_score(n, n, g) == 0.0, "S(N) != 0 at N=" + std::to_string(n));
  }
  const double s = log_rank_score(2, 100, 1.0);
  const double oracle = 1.0 - std::log(2.0) / std::log(100.0);
  c.expect(std::abs(s - 0.849485) <= 1e-6, "S(2,100,1) = " + fmt(s, 9));
  c.expect(std::abs(s - oracle) <= 1e-15, "S(2,100,1) differs from direct formula");
  c.detail = "S(2,100,1)=" + fmt(s);
}

// ---- C2 ----

void fusion_exactness(Check& c) {
  RetrievalConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.2;
  const auto one = fuse_and_rank({{"x", 0.8}}, {{"x", 0.6}}, {{"x", 3}}, cfg);
  const double worked = one.at(0).fused_score;
  // 0.97726 is the five-decimal rounding of 0.4 + 0.3 + 0.2 ln 4.
  const double exact = 0.4 + 0.3 + 0.2 * std::log(4.0);
  c.expect(std::abs(worked - exact) <= 1e-12, "worked example = " + fmt(worked, 12) + ", exact " + fmt(exact, 12));
  c.expect(fmt(worked, 5) == "0.97726", "worked example does not round to 0.97726");

  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t tuples = 0;
  while (tuples < 1000) {
    const std::size_t n = 1 + rng() % 20;
    ScoreMap v, r;
    HitMap h;
    std::vector<oracle::FusionInput> in;
    for (std::size_t i = 0; i < n && tuples < 1000; ++i, ++tuples) {
      const std::string key = "seg" + std::to_string(rng() % 100000) + "/" + std::to_string(i);
      const bool coarse = rng() % 2;
      const double sv = coarse ? std::round(u(rng) * 3) / 3 : u(rng);
      const double sr = coarse ? std::round(u(rng) * 3) / 3 : u(rng);
      const std::size_t hits = rng() % 5;
      v[key] = sv;
      r[key] = sr;
      if (hits) h[key] = hits;
      in.push_back({key, sv, sr, hits});
    }
    cfg.alpha = u(rng);
    cfg.beta = u(rng);
    const auto got = fuse_and_rank(v, r, h, cfg);
    const auto want = oracle::fuse(in, cfg.alpha, cfg.beta);
    c.expect(got.size() == want.size(), "result count differs");
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
      c.expect(got[i].segment_key == want[i].key, "order differs at position " + std::to_string(i));
      c.expect(std::abs(got[i].fused_score - want[i].score) <= 1e-12, "score differs for " + want[i].key);
    }
  }
  c.detail = "worked=" + fmt(worked, 9) + ", tuples=1000";
}

// ---- C3 ----

void bm25_equivalence(Check& c) {
  const auto worked_segs = hiqa::testing::text_segments({{"d1", "a b"}, {"d2", "a"}});
  const double worked = bm25_score(build_bm25_index(worked_segs), "b", "doc#d1");
  c.expect(std::abs(worked - 0.6100) <= 1e-3, "worked example = " + fmt(worked));

  std::mt19937_64 rng(303);
  std::size_t comparisons = 0;
  for (int corpus = 0; corpus < 100; ++corpus) {
    const std::size_t n_docs = 1 + rng() % 50;
    const std::size_t vocab = 1 + rng() % 40;
    std::vector<std::pair<std::string, std::string>> items;
    std::vector<std::string> docs;
    bool any_tokens = false;
    for (std::size_t d = 0; d < n_docs; ++d) {
      const std::size_t len = rng() % 201;
      std::string body;
      for (std::size_t w = 0; w < len; ++w) body += (w ? " w" : "w") + std::to_string(rng() % vocab);
      any_tokens = any_tokens || len > 0;
      docs.push_back(body);
      items.emplace_back("s" + std::to_string(d), body);
    }
    if (!any_tokens) continue;
    const double k1 = 0.5 + static_cast<double>(rng() % 150) / 100.0;
    const double b = static_cast<double>(rng() % 101) / 100.0;
    const auto idx = build_bm25_index(hiqa::testing::text_segments(items), k1, b);
    for (int q = 0; q < 3; ++q) {
      std::string query;
      const std::size_t qlen = 1 + rng() % 6;
      for (std::size_t w = 0; w < qlen; ++w) query += " w" + std::to_string(rng() % (vocab + 3));
      for (std::size_t d = 0; d < n_docs; ++d) {
        const double got = bm25_score(idx, query, "doc#s" + std::to_string(d));
        const double want = oracle::bm25(docs, query, d, k1, b);
        c.expect(std::abs(got - want) <= 1e-9, "corpus " + std::to_string(corpus) + " doc " + std::to_string(d) +
                                                   ": " + fmt(got, 12) + " vs " + fmt(want, 12));
        ++comparisons;
      }
    }
  }
  c.detail = "worked=" + fmt(worked, 4) + ", comparisons=" + std::to_string(comparisons);
}

// ---- C4 ----

std::string random_document(std::mt19937_64& rng, std::size_t n_words) {
  static const char* const gaps[] = {" ", "  ", "\n", "\t", "\n\n", " 　 "};
  std::string s = rng() % 2 ? "  " : "";
  for (std::size_t i = 0; i < n_words; ++i) {
    if (i) s += gaps[rng() % 6];
    s += (rng() % 5 == 0 ? "é" : "w") + std::to_string(i);
  }
  if (rng() % 2) s += "\n";
  return s;
}

void window_tiling(Check& c) {
  std::mt19937_64 rng(404);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = rng() % 5000;
    const std::size_t w = 1 + rng() % 1000;
    const std::size_t k = rng() % 500;
    const auto plan = plan_windows(n, w, k);
    const std::size_t t = n == 0 ? 0 : (n + w - 1) / w;
    c.expect(plan.iterations == t, "T mismatch");
    std::vector<int> covered(n, 0);
    for (std::size_t j = 0; j < plan.cores.size(); ++j) {
      for (std::size_t x = plan.cores[j].begin; x < plan.cores[j].end && x < n; ++x) ++covered[x];
      const std::size_t lo = j * w > k ? j * w - k : 0;
      c.expect(plan.spans[j] == WordRange{lo, std::min(n, (j + 1) * w + k)}, "span mismatch");
    }
    c.expect(std::all_of(covered.begin(), covered.end(), [](int x) { return x == 1; }),
             "cores do not tile [0," + std::to_string(n) + ") with W=" + std::to_string(w));
  }
  for (int i = 0; i < 50; ++i) {
    const std::string doc = random_document(rng, rng() % 700);
    const std::size_t n = text::count_words(doc);
    IdentityConverter id;
    const auto out = convert_document(doc, id, plan_windows(n, 1 + rng() % 120, 0));
    std::vector<std::string> a, b;
    for (auto w : text::split_words(doc)) a.emplace_back(doc.substr(w.begin, w.end - w.begin));
    for (auto w : text::split_words(out)) b.emplace_back(out.substr(w.begin, w.end - w.begin));
    c.expect(a == b, "identity round trip is not word-exact");
  }
  c.detail = "plans=500, round trips=50";
}

// ---- C5 ----

struct GenNode {
  std::string number;
  std::string title;
  int parent;  // -1 for top-level chapters
};

std::vector<GenNode> random_chapter_tree(std::mt19937_64& rng) {
  const std::size_t limit = 1 + rng() % 200;
  std::vector<GenNode> nodes;
  std::function<void(int, const std::string&, int)> grow = [&](int parent, const std::string& prefix, int depth) {
    const std::size_t fan = 1 + rng() % 4;
    for (std::size_t i = 1; i <= fan && nodes.size() < limit; ++i) {
      const std::string num = prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i);
      nodes.push_back({num, "Topic " + std::to_string(rng() % 1000), parent});
      const int self = static_cast<int>(nodes.size()) - 1;
      if (depth < 5 && rng() % 3 != 0) grow(self, num, depth + 1);
    }
  };
  while (nodes.size() < limit) {
    const std::size_t before = nodes.size();
    // Continue top-level numbering after the last top-level chapter.
    std::size_t top = 0;
    for (const auto& n : nodes)
      if (n.parent < 0) ++top;
    const std::size_t fan = 1 + rng() % 3;
    for (std::size_t i = 1; i <= fan && nodes.size() < limit; ++i) {
      const std::string num = std::to_string(top + i);
      nodes.push_back({num, "Chapter " + std::to_string(rng() % 1000), -1});
      const int self = static_cast<int>(nodes.size()) - 1;
      if (rng() % 4 != 0) grow(self, num, 2);
    }
    if (nodes.size() == before) break;
  }
  return nodes;
}

void path_oracle(Check& c) {
  std::mt19937_64 rng(505);
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto gen = random_chapter_tree(rng);
    const bool preamble = rng() % 2;
    const std::string title = "Manual " + std::to_string(t);
    std::string md = preamble ? "front matter\n" : "";
    for (std::size_t i = 0; i < gen.size(); ++i) md += "# " + gen[i].number + " " + gen[i].title + "\nbody " + std::to_string(i) + "\n";

    DocumentRecord doc;
    doc.doc_id = "m" + std::to_string(t);
    doc.title = title;
    doc.segments = parse_markdown(md, title);
    const auto out = cascade_metadata(build_tree(doc));
    const std::size_t offset = preamble ? 1 : 0;
    c.expect(out.size() == gen.size() + offset, "segment count mismatch in tree " + std::to_string(t));
    if (out.size() != gen.size() + offset) continue;
    if (preamble) c.expect(out[0].metadata_path == std::vector<std::string>{title}, "preamble path");
    for (std::size_t i = 0; i < gen.size(); ++i) {
      std::vector<std::string> expected;
      for (int n = static_cast<int>(i); n >= 0; n = gen[n].parent) expected.push_back(gen[n].number + " " + gen[n].title);
      expected.push_back(title);
      std::reverse(expected.begin(), expected.end());
      const auto& seg = out[i + offset];
      c.expect(seg.metadata_path == expected, "path mismatch at " + gen[i].number);
      c.expect(seg.metadata_path.size() == static_cast<std::size_t>(seg.level) + 1, "length != level + 1");
      ++checked;
    }
  }
  c.detail = "trees=100, segments=" + std::to_string(checked);
}

// ---- shared corpus helpers ----

struct Built {
  std::vector<DocumentRecord> docs;
  IndexBundle augmented;
  IndexBundle plain;
};

Built build_manuals(const TempDir& dir, std::size_t n_docs, Components& comps, bool remove_table_data = true) {
  const std::string sub = "corpus" + std::to_string(n_docs) + (remove_table_data ? "" : "k");
  hiqa::testing::write_manual_corpus(dir, n_docs, sub);
  Built b;
  b.docs = load_corpus(dir / sub);
  structure_documents(b.docs, *comps.converter, 400, 50);
  BuildOptions aug;
  aug.remove_table_data = remove_table_data;
  b.augmented = build_bundle(b.docs, comps, aug);
  BuildOptions none;
  none.mode = AugmentMode::none;
  none.remove_table_data = remove_table_data;
  b.plain = build_bundle(b.docs, comps, none);
  return b;
}

struct RunStats {
  double mean_log_rank = 0.0;
  double rank1_accuracy = 0.0;
};

RunStats run_queries(const IndexBundle& bundle, Components& comps, std::size_t n_docs) {
  const Retriever ret(bundle, *comps.embedder, *comps.keyword_extractor);
  std::vector<EvalQuery> bank;
  for (const auto& q : hiqa::testing::manual_queries(n_docs)) bank.push_back({q.id, q.text, {q.relevant_key}, {}});
  const auto cfg = RetrievalConfig{};
  const auto report = evaluate_dataset(bank, ret, cfg);
  std::size_t correct = 0;
  for (const auto& q : bank) correct += ret.retrieve(q.query, cfg).ranking.front().segment_key == q.relevant_keys[0];
  return {report.mean, static_cast<double>(correct) / static_cast<double>(bank.size())};
}

// ---- C6 ----

void directional_reproduction(Check& c) {
  TempDir dir;
  AppConfig cfg;
  auto comps = make_components(cfg);
  const auto built = build_manuals(dir, 20, comps);
  const auto hca = run_queries(built.augmented, comps, 20);
  const auto none = run_queries(built.plain, comps, 20);
  c.expect(hca.mean_log_rank - none.mean_log_rank >= 0.05,
           "log-rank gain " + fmt(hca.mean_log_rank - none.mean_log_rank) + " < 0.05");
  c.expect(hca.rank1_accuracy > none.rank1_accuracy, "rank-1 accuracy not strictly higher");

  std::string curve;
  double previous = 2.0;
  for (std::size_t n : {5u, 10u, 15u, 20u}) {
    const auto sized = build_manuals(dir, n, comps);
    const double acc = run_queries(sized.plain, comps, n).rank1_accuracy;
    c.expect(acc <= previous, "no-augmentation accuracy rose at " + std::to_string(n) + " documents");
    previous = acc;
    curve += (curve.empty() ? "" : " ") + std::to_string(n) + ":" + fmt(acc, 3);
  }
  c.detail = "log-rank hca=" + fmt(hca.mean_log_rank, 4) + " none=" + fmt(none.mean_log_rank, 4) +
             ", acc@1 hca=" + fmt(hca.rank1_accuracy, 3) + " none=" + fmt(none.rank1_accuracy, 3) +
             ", none acc@1 by size " + curve;
}

// ---- C7 ----

double cosine_to_row(const IndexBundle& b, const Embedding& q, const std::string& key) {
  const auto row = b.vectors.find(key);
  if (!row) return std::nan("");
  return simd::dot(q.values, b.vectors.row(*row));
}

void table_augmentation(Check& c) {
  TempDir dir;
  AppConfig cfg;
  auto comps = make_components(cfg);
  const auto with_removal = build_manuals(dir, 20, comps, true);
  const auto without_removal = build_manuals(dir, 20, comps, false);
  const std::string labels[] = {"Supply voltage", "Input voltage", "Output current", "Storage temperature"};
  double min_gain = 1.0, sum_with = 0.0, sum_without = 0.0;
  std::size_t n = 0;
  for (std::size_t d = 0; d < 20; ++d) {
    const std::string key = hiqa::testing::doc_id_for(d) + "#4.1";
    for (const auto& label : labels) {
      const auto q = comps.embedder->embed(hiqa::testing::product_name(d) + " " + label + " maximum rating");
      const double a = cosine_to_row(with_removal.augmented, q, key);
      const double b = cosine_to_row(without_removal.augmented, q, key);
      c.expect(a >= b, key + " '" + label + "': " + fmt(a) + " < " + fmt(b));
      min_gain = std::min(min_gain, a - b);
      sum_with += a;
      sum_without += b;
      ++n;
    }
  }
  c.detail = "mean cosine removed=" + fmt(sum_with / n, 4) + " kept=" + fmt(sum_without / n, 4) +
             ", min gain=" + fmt(min_gain, 4);
}

// ---- C8 ----

void cohesion_direction(Check& c) {
  TempDir dir;
  AppConfig cfg;
  auto comps = make_components(cfg);
  const auto built = build_manuals(dir, 20, comps);
  std::map<std::string, std::vector<Vector>> aug, plain;
  for (const auto& cs : built.augmented.segments) {
    aug[cs.doc_id].push_back(comps.embedder->embed(cs.segment.embedding_text).values);
    plain[cs.doc_id].push_back(comps.embedder->embed(plain_embedding_text(cs.segment)).values);
  }
  const auto sa = cohesion_stats(aug);
  const auto sp = cohesion_stats(plain);
  double worst = 1.0, mean_a = 0.0, mean_p = 0.0;
  for (const auto& [doc, st] : sa) {
    const double a = *st.mean_pairwise_cosine;
    const double p = *sp.at(doc).mean_pairwise_cosine;
    c.expect(a > p, doc + ": augmented " + fmt(a) + " <= plain " + fmt(p));
    worst = std::min(worst, a - p);
    mean_a += a / static_cast<double>(sa.size());
    mean_p += p / static_cast<double>(sa.size());
    c.expect(std::abs(a - oracle::mean_pairwise_cosine(aug.at(doc))) <= 1e-9, doc + ": augmented stat vs loop");
    c.expect(std::abs(p - oracle::mean_pairwise_cosine(plain.at(doc))) <= 1e-9, doc + ": plain stat vs loop");
  }
  c.detail = "mean cohesion augmented=" + fmt(mean_a, 4) + " plain=" + fmt(mean_p, 4) + ", min gain=" + fmt(worst, 4);
}

// ---- C9 ----

void persistence(Check& c) {
  TempDir dir;
  hiqa::testing::write_manual_corpus(dir, 20, "corpus");
  AppConfig cfg;
  cfg.corpus_dir = dir / "corpus";
  auto comps = make_components(cfg);
  const auto first = ingest_corpus(cfg, comps);
  save_index(first.bundle, dir / "index1");
  const auto loaded = load_index(dir / "index1");

  std::vector<EvalQuery> bank;
  for (const auto& q : hiqa::testing::manual_queries(20)) bank.push_back({q.id, q.text, {q.relevant_key}, {}});
  const Retriever before(first.bundle, *comps.embedder, *comps.keyword_extractor);
  const Retriever after(loaded, *comps.embedder, *comps.keyword_extractor);
  const auto r1 = evaluate_dataset(bank, before, cfg.retrieval());
  const auto r2 = evaluate_dataset(bank, after, cfg.retrieval());
  c.expect(r1.per_query_scores == r2.per_query_scores, "per-query scores changed across save/load");
  c.expect(r1.mean == r2.mean && r1.std == r2.std, "summary changed across save/load");

  auto comps2 = make_components(cfg);
  save_index(ingest_corpus(cfg, comps2).bundle, dir / "index2");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "index1")) {
    const auto other = dir / "index2" / e.path().filename();
    c.expect(hiqa::testing::read_bytes(e.path()) == hiqa::testing::read_bytes(other),
             e.path().filename().string() + " differs between ingests");
    ++files;
  }
  c.detail = "queries=" + std::to_string(bank.size()) + ", files compared=" + std::to_string(files);
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  void (*run)(Check&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "log-rank exactness", 1.0, log_rank_exactness},
      {2, "fusion exactness", 1.0, fusion_exactness},
      {3, "BM25 oracle equivalence", 5.0, bm25_equivalence},
      {4, "window tiling", 2.0, window_tiling},
      {5, "metadata path oracle", 2.0, path_oracle},
      {6, "HCA vs no augmentation on near-identical manuals", 30.0, directional_reproduction},
      {7, "table data removal raises label similarity", 5.0, table_augmentation},
      {8, "augmented per-document cohesion", 5.0, cohesion_direction},
      {9, "persistence and determinism", 10.0, persistence},
  };
  std::printf("SIMD kernels: %s\n", std::string(simd::to_string(simd::active().isa)).c_str());
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= cr.budget_seconds) {
      check.failures.push_back("took " + fmt(secs, 2) + " s, budget " + fmt(cr.budget_seconds, 0) + " s");
    }
    const bool ok = check.failures.empty();
    failed += !ok;
    std::printf("[%s] C%d %s (%.3f s) %s\n", ok ? "PASS" : "FAIL", cr.id, cr.name, secs, check.detail.c_str());
    for (const auto& f : check.failures) std::printf("       - %s\n", f.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
