#include "hiqa/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "hiqa/error.hpp"
#include "hiqa/plugin.hpp"
#include "hiqa/text.hpp"

namespace hiqa {
namespace fs = std::filesystem;
using nlohmann::json;

void AppConfig::validate() const {
  retrieval().validate();
  if (window < 1) throw InvalidParameter("window must be >= 1");
  if (!(k1 > 0.0)) throw InvalidParameter("k1 must be > 0");
  if (!(b >= 0.0 && b <= 1.0)) throw InvalidParameter("b must be in [0, 1]");
  if (embedding_dim < 1) throw InvalidParameter("embedding dim must be >= 1");
  if (embedder.kind != "hashing" && embedder.kind != "process") {
    throw InvalidParameter("embedder kind must be 'hashing' or 'process'");
  }
  if (keyword_extractor.kind != "pattern" && keyword_extractor.kind != "process") {
    throw InvalidParameter("keyword extractor kind must be 'pattern' or 'process'");
  }
  if (converter.kind != "rule" && converter.kind != "identity" && converter.kind != "process") {
    throw InvalidParameter("converter kind must be 'rule', 'identity' or 'process'");
  }
  for (const auto* p : {&embedder, &keyword_extractor, &converter}) {
    if (p->kind == "process" && p->command.empty()) throw InvalidParameter("process plug-ins need a command");
  }
}

namespace {

PluginSpec plugin_from_json(const json& j, const char* what) {
  if (j.is_string()) return {j.get<std::string>(), ""};
  if (!j.is_object()) throw InvalidParameter(std::string(what) + " must be a string or an object");
  return {j.value("kind", std::string()), j.value("command", std::string())};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
T number(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidParameter(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

AppConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw InvalidParameter("config must be a JSON object");
  AppConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "corpus_dir") {
      c.corpus_dir = resolve(base_dir, value.get<std::string>());
    } else if (key == "index_dir") {
      c.index_dir = resolve(base_dir, value.get<std::string>());
    } else if (key == "manifest") {
      c.manifest = resolve(base_dir, value.get<std::string>());
    } else if (key == "window") {
      c.window = number<std::size_t>(value, "window");
    } else if (key == "padding") {
      c.padding = number<std::size_t>(value, "padding");
    } else if (key == "alpha") {
      c.alpha = number<double>(value, "alpha");
    } else if (key == "beta") {
      c.beta = number<double>(value, "beta");
    } else if (key == "gamma") {
      c.gamma = number<double>(value, "gamma");
    } else if (key == "top_k") {
      c.top_k = number<std::size_t>(value, "top_k");
    } else if (key == "k1") {
      c.k1 = number<double>(value, "k1");
    } else if (key == "b") {
      c.b = number<double>(value, "b");
    } else if (key == "embedder") {
      c.embedder = plugin_from_json(value, "embedder");
      if (value.is_object() && value.contains("dim")) c.embedding_dim = number<std::size_t>(value["dim"], "dim");
    } else if (key == "keyword_extractor") {
      c.keyword_extractor = plugin_from_json(value, "keyword_extractor");
    } else if (key == "converter") {
      c.converter = plugin_from_json(value, "converter");
    } else if (key == "captioner") {
      const auto spec = plugin_from_json(value, "captioner");
      if (!spec.command.empty()) c.captioner_command = spec.command;
    } else if (key == "keyword_dictionary") {
      c.keyword_dictionary = resolve(base_dir, value.get<std::string>());
    } else if (key == "remove_table_data") {
      c.remove_table_data = value.get<bool>();
    } else {
      throw InvalidParameter("unknown config field '" + key + "'");
    }
  }
  return c;
}

AppConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidParameter("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::set<std::string> load_keyword_dictionary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open keyword dictionary " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(text::casefold(t));
  }
  return out;
}

Components make_components(const AppConfig& config) {
  config.validate();
  Components c;
  if (config.embedder.kind == "process") {
    c.embedder = std::make_unique<ProcessEmbedder>(config.embedder.command, config.embedding_dim);
  } else {
    c.embedder = std::make_unique<HashingEmbedder>(config.embedding_dim);
  }
  if (config.keyword_extractor.kind == "process") {
    c.keyword_extractor = std::make_unique<ProcessKeywordExtractor>(config.keyword_extractor.command);
  } else {
    c.keyword_extractor = std::make_unique<PatternKeywordExtractor>();
  }
  if (config.converter.kind == "process") {
    c.converter = std::make_unique<ProcessConverter>(config.converter.command);
  } else if (config.converter.kind == "identity") {
    c.converter = std::make_unique<IdentityConverter>();
  } else {
    c.converter = std::make_unique<RuleBasedConverter>();
  }
  if (config.captioner_command) c.captioner = std::make_unique<ProcessCaptioner>(*config.captioner_command);
  if (config.keyword_dictionary) c.dictionary = load_keyword_dictionary(*config.keyword_dictionary);
  return c;
}

void structure_documents(std::vector<DocumentRecord>& docs, DocumentConverter& converter, std::size_t window,
                         std::size_t padding, Diagnostics* diagnostics) {
  for (auto& doc : docs) {
    const auto plan = plan_windows(text::count_words(doc.raw_text), window, padding);
    std::string markdown;
    try {
      markdown = convert_document(doc.raw_text, converter, plan);
    } catch (const ConversionError& e) {
      throw DataError(doc.source_path + ": " + e.what());
    }
    doc.segments = parse_markdown(markdown, doc.title, diagnostics);
  }
  check_unique_keys(docs);
}

IndexBundle build_bundle(const std::vector<DocumentRecord>& docs, const Components& components,
                         const BuildOptions& options, Diagnostics* diagnostics) {
  std::vector<CorpusSegment> segments;
  for (const auto& doc : docs) {
    std::vector<Segment> augmented;
    if (options.mode == AugmentMode::cascade) {
      AugmentOptions aug;
      aug.captioner = components.captioner.get();
      aug.diagnostics = diagnostics;
      aug.remove_table_data = options.remove_table_data;
      augmented = cascade_metadata(build_tree(doc), aug);
    } else {
      augmented = doc.segments;
      for (auto& seg : augmented) {
        seg.embedding_text = plain_embedding_text(seg);
        seg.metadata_path.clear();
      }
    }
    for (auto& seg : augmented) segments.push_back({doc.doc_id, std::move(seg)});
  }

  IndexBundle bundle;
  bundle.embedder_name = components.embedder->name();
  bundle.vectors = build_vector_index(segments, *components.embedder, diagnostics);
  bundle.bm25 = build_bm25_index(segments, options.k1, options.b);
  bundle.keywords = build_keyword_table(segments, *components.keyword_extractor, components.dictionary);
  bundle.segments = std::move(segments);
  return bundle;
}

json IngestReport::to_json() const {
  return json{{"documents", documents},
              {"segments", segments},
              {"vector_entries", vector_entries},
              {"skipped", skipped},
              {"warning_count", warnings.size()},
              {"warnings", warnings}};
}

IngestResult ingest_corpus(const AppConfig& config, Components& components) {
  config.validate();
  Diagnostics diag;
  auto docs = load_corpus(config.corpus_dir, config.manifest);
  if (docs.empty()) diag.warn("corpus " + config.corpus_dir.string() + " contains no documents");
  structure_documents(docs, *components.converter, config.window, config.padding, &diag);

  BuildOptions options;
  options.remove_table_data = config.remove_table_data;
  options.k1 = config.k1;
  options.b = config.b;
  IngestResult result;
  result.bundle = build_bundle(docs, components, options, &diag);
  result.report.documents = docs.size();
  result.report.segments = result.bundle.segments.size();
  result.report.vector_entries = result.bundle.vectors.size();
  result.report.skipped = result.report.segments - result.report.vector_entries;
  result.report.warnings = diag.warnings();
  return result;
}

}  // namespace hiqa
