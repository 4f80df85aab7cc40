#include "hiqa/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiqa/error.hpp"
#include "hiqa/evalkit.hpp"
#include "hiqa/pipeline.hpp"
#include "hiqa/plugin.hpp"
#include "hiqa/text.hpp"

namespace hiqa {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::string corpus;
  std::string index;
  std::optional<double> alpha, beta, gamma, k1, b;
  std::optional<std::size_t> top_k, window, padding;
};

AppConfig resolve_config(const Overrides& o) {
  AppConfig c = o.config.empty() ? AppConfig{} : load_config(o.config);
  if (!o.corpus.empty()) c.corpus_dir = o.corpus;
  if (!o.index.empty()) c.index_dir = o.index;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.k1) c.k1 = *o.k1;
  if (o.b) c.b = *o.b;
  if (o.top_k) c.top_k = *o.top_k;
  if (o.window) c.window = *o.window;
  if (o.padding) c.padding = *o.padding;
  c.validate();
  return c;
}

void require_index_dir(const AppConfig& c) {
  if (c.index_dir.empty()) throw InvalidParameter("no index directory given (use --index or index_dir in the config)");
}

std::string snippet(std::string_view content, std::size_t max_chars) {
  std::string out;
  const auto words = text::split_words(content);
  for (const auto& w : words) {
    const auto word = content.substr(w.begin, w.end - w.begin);
    if (!out.empty() && out.size() + 1 + word.size() > max_chars) {
      out += " ...";
      break;
    }
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

int cmd_ingest(const AppConfig& config, std::ostream& out, std::ostream& err) {
  if (config.corpus_dir.empty()) throw InvalidParameter("no corpus directory given (use --corpus or corpus_dir)");
  require_index_dir(config);
  Components components = make_components(config);
  const IngestResult result = ingest_corpus(config, components);
  save_index(result.bundle, config.index_dir);
  const std::string report = result.report.to_json().dump(2) + "\n";
  std::ofstream(config.index_dir / "ingest_report.json", std::ios::binary) << report;

  for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
  out << "ingested " << result.report.documents << " documents, " << result.report.segments << " segments ("
      << result.report.vector_entries << " vectors, " << result.report.skipped << " skipped, "
      << result.report.warnings.size() << " warnings) into " << config.index_dir.string() << '\n';
  return kExitOk;
}

json context_bundle(const std::string& query, const Retrieval& retrieval, const Retriever& retriever,
                    const RetrievalConfig& cfg) {
  json results = json::array();
  for (const auto& r : retrieval.top()) {
    const auto& cs = retriever.segment(r.segment_key);
    results.push_back({{"rank", r.rank},
                       {"segment_key", r.segment_key},
                       {"fused_score", r.fused_score},
                       {"score_v", r.score_v},
                       {"score_r", r.score_r},
                       {"keyword_hits", r.keyword_hits},
                       {"metadata_path", cs.segment.metadata_path},
                       {"kind", std::string(to_string(cs.segment.kind))},
                       {"content", cs.segment.content}});
  }
  return json{{"query", query},
              {"config", {{"alpha", cfg.alpha}, {"beta", cfg.beta}, {"top_k", cfg.top_k}, {"gamma", cfg.gamma}}},
              {"corpus_size", retriever.corpus_size()},
              {"results", std::move(results)}};
}

int cmd_query(const AppConfig& config, const std::string& query, bool as_json, const std::string& llm_command,
              std::ostream& out, std::ostream& err) {
  require_index_dir(config);
  const IndexBundle bundle = load_index(config.index_dir);
  Components components = make_components(config);
  const Retriever retriever(bundle, *components.embedder, *components.keyword_extractor, components.dictionary);
  const RetrievalConfig cfg = config.retrieval();
  Diagnostics diag;
  const Retrieval retrieval = retriever.retrieve(query, cfg, {}, &diag);
  for (const auto& w : diag.warnings()) err << "warning: " << w << '\n';

  const json ctx = context_bundle(query, retrieval, retriever, cfg);
  if (as_json) {
    out << ctx.dump(2) << '\n';
  } else {
    out << "rank  fused     vector  bm25    |C|  segment\n";
    for (const auto& r : retrieval.top()) {
      const auto& seg = retriever.segment(r.segment_key).segment;
      out << std::left << std::setw(6) << r.rank << std::setw(10) << fixed(r.fused_score, 5) << std::setw(8)
          << fixed(r.score_v, 4) << std::setw(8) << fixed(r.score_r, 4) << std::setw(5) << r.keyword_hits
          << r.segment_key << '\n';
      out << "      path: " << serialize_path(seg.metadata_path) << '\n';
      out << "      " << snippet(seg.content, 100) << '\n';
    }
    out << std::right;
  }
  if (!llm_command.empty()) {
    ProcessAnswerer answerer(llm_command);
    out << "answer: " << answerer.answer(ctx) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const AppConfig& config, const std::string& bank_path, const std::string& out_path, std::ostream& out) {
  require_index_dir(config);
  const auto queries = load_question_bank(bank_path);
  if (queries.empty()) throw DataError("question bank " + bank_path + " is empty");
  const IndexBundle bundle = load_index(config.index_dir);

  std::set<std::string> known;
  for (const auto& cs : bundle.segments) known.insert(cs.key());
  std::vector<std::string> offending;
  for (const auto& q : queries) {
    if (std::any_of(q.relevant_keys.begin(), q.relevant_keys.end(), [&](const auto& k) { return !known.count(k); })) {
      offending.push_back(q.query_id);
    }
  }
  if (!offending.empty()) {
    throw DataError("unknown relevant segment keys in queries: " + text::join(offending, ", "));
  }

  Components components = make_components(config);
  const Retriever retriever(bundle, *components.embedder, *components.keyword_extractor, components.dictionary);
  const EvalReport report = evaluate_dataset(queries, retriever, config.retrieval());

  if (out_path.empty()) {
    write_report_csv(out, report);
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw DataError("cannot write " + out_path);
    write_report_csv(file, report);
    out << "queries=" << report.per_query_scores.size() << " mean=" << fixed(report.mean, 6)
        << " max=" << fixed(report.max, 6) << " min=" << fixed(report.min, 6) << " std=" << fixed(report.std, 6)
        << " gamma=" << report.gamma << " N=" << report.corpus_size << '\n';
  }
  return kExitOk;
}

void write_cohesion_csv(std::ostream& out, const std::map<std::string, CohesionStats>& stats,
                        const Projection& projection) {
  out << std::setprecision(17);
  out << "record,group,key,mean_pairwise_cosine,centroid_norm,count,x,y\n";
  for (const auto& [group, s] : stats) {
    out << "group," << group << ",,";
    if (s.mean_pairwise_cosine) out << *s.mean_pairwise_cosine;
    else out << "NA";
    out << ',' << s.centroid_norm << ',' << s.count << ",,\n";
  }
  for (const auto& row : projection.rows) {
    out << "coord," << row.group << ',' << row.key << ",,,," << row.x << ',' << row.y << '\n';
  }
}

int cmd_cohesion(const AppConfig& config, const std::string& grouping, const std::string& out_dir,
                 std::ostream& out) {
  require_index_dir(config);
  if (grouping != "by-document" && grouping != "by-section-title") {
    throw InvalidParameter("grouping must be 'by-document' or 'by-section-title'");
  }
  const IndexBundle bundle = load_index(config.index_dir);
  Components components = make_components(config);

  auto group_of = [&](const CorpusSegment& cs) {
    if (grouping == "by-document") return cs.doc_id;
    return text::casefold(cs.segment.title);
  };

  // Same segment set for both variants: those present in the vector index.
  struct Variant {
    std::string name;
    std::map<std::string, std::vector<Vector>> groups;
    std::vector<LabeledVector> labeled;
  };
  Variant augmented{"augmented", {}, {}};
  Variant plain{"plain", {}, {}};
  for (const auto& cs : bundle.segments) {
    const auto key = cs.key();
    const auto row = bundle.vectors.find(key);
    if (!row) continue;
    const Embedding e = components.embedder->embed(plain_embedding_text(cs.segment));
    if (!e.embeddable) continue;
    const auto group = group_of(cs);
    const auto r = bundle.vectors.row(*row);
    Vector aug(r.begin(), r.end());
    augmented.groups[group].push_back(aug);
    augmented.labeled.push_back({key, group, std::move(aug)});
    plain.groups[group].push_back(e.values);
    plain.labeled.push_back({key, group, e.values});
  }

  if (!out_dir.empty()) fs::create_directories(out_dir);
  out << "variant    groups  mean_cohesion\n";
  for (const Variant* v : {&augmented, &plain}) {
    const auto stats = cohesion_stats(v->groups);
    const Projection projection = export_coordinates(v->labeled);
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& [_, s] : stats) {
      if (s.mean_pairwise_cosine) {
        sum += *s.mean_pairwise_cosine;
        ++defined;
      }
    }
    out << std::left << std::setw(11) << v->name << std::setw(8) << stats.size()
        << (defined ? fixed(sum / static_cast<double>(defined), 6) : std::string("NA")) << std::right << '\n';
    if (!out_dir.empty()) {
      std::ofstream file(fs::path(out_dir) / ("cohesion_" + v->name + ".csv"), std::ios::binary);
      if (!file) throw DataError("cannot write to " + out_dir);
      write_cohesion_csv(file, stats, projection);
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical multi-document retrieval: ingest, query, evaluate"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON config file");
    sub->add_option("--corpus", o.corpus, "corpus directory");
    sub->add_option("--index", o.index, "index directory");
    sub->add_option("--alpha", o.alpha, "vector route weight");
    sub->add_option("--beta", o.beta, "keyword bonus weight");
    sub->add_option("--gamma", o.gamma, "log-rank curve shape");
    sub->add_option("--top-k", o.top_k, "results to return");
    sub->add_option("--window", o.window, "conversion window in words");
    sub->add_option("--padding", o.padding, "window padding in words");
    sub->add_option("--k1", o.k1, "BM25 k1");
    sub->add_option("--b", o.b, "BM25 b");
  };

  auto* ingest = app.add_subcommand("ingest", "convert, augment and index a corpus");
  add_common(ingest);

  std::string query_text;
  bool as_json = false;
  std::string llm_command;
  auto* query = app.add_subcommand("query", "retrieve the top-k segments for a question");
  add_common(query);
  query->add_option("text", query_text, "question")->required();
  query->add_flag("--json", as_json, "emit the full context bundle as JSON");
  query->add_option("--llm-command", llm_command, "external answer generator (line-delimited JSON)");

  std::string bank;
  std::string csv_out;
  auto* eval = app.add_subcommand("eval", "log-rank evaluation over a JSONL question bank");
  add_common(eval);
  eval->add_option("bank", bank, "question bank (.jsonl)")->required();
  eval->add_option("-o,--out", csv_out, "write the per-query CSV here");

  std::string grouping = "by-document";
  std::string out_dir;
  auto* cohesion = app.add_subcommand("cohesion", "cohesion statistics and PCA coordinates");
  add_common(cohesion);
  cohesion->add_option("--grouping", grouping, "by-document | by-section-title");
  cohesion->add_option("-o,--out-dir", out_dir, "directory for CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const AppConfig config = resolve_config(o);
    if (ingest->parsed()) return cmd_ingest(config, out, err);
    if (query->parsed()) return cmd_query(config, query_text, as_json, llm_command, out, err);
    if (eval->parsed()) return cmd_eval(config, bank, csv_out, out);
    if (cohesion->parsed()) return cmd_cohesion(config, grouping, out_dir, out);
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace hiqa
