#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiqa/corpus.hpp"
#include "hiqa/diagnostics.hpp"
#include "hiqa/embedder.hpp"
#include "hiqa/formatter.hpp"
#include "hiqa/hca.hpp"
#include "hiqa/index.hpp"
#include "hiqa/index_store.hpp"
#include "hiqa/retriever.hpp"

namespace hiqa {

/// Kind plus, for out-of-process plug-ins, the command to run.
struct PluginSpec {
  std::string kind;
  std::string command;
};

struct AppConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path index_dir;
  std::optional<std::filesystem::path> manifest;
  std::size_t window = 400;
  std::size_t padding = 50;
  double alpha = 0.5;
  double beta = 0.1;
  double gamma = 1.0;
  std::size_t top_k = 5;
  double k1 = Bm25Index::kDefaultK1;
  double b = Bm25Index::kDefaultB;
  PluginSpec embedder{"hashing", ""};
  std::size_t embedding_dim = 256;
  PluginSpec keyword_extractor{"pattern", ""};
  PluginSpec converter{"rule", ""};
  std::optional<std::string> captioner_command;
  std::optional<std::filesystem::path> keyword_dictionary;
  bool remove_table_data = true;

  RetrievalConfig retrieval() const { return {alpha, beta, top_k, gamma}; }
  /// Throws InvalidParameter on any out-of-range value.
  void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
/// Unknown keys are rejected with InvalidParameter.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Model-dependent pieces selected by the config.
struct Components {
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<KeywordExtractor> keyword_extractor;
  std::unique_ptr<DocumentConverter> converter;
  std::unique_ptr<Captioner> captioner;  // may be null
  std::set<std::string> dictionary;      // case-folded user keywords
};

Components make_components(const AppConfig& config);

/// One keyword per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> load_keyword_dictionary(const std::filesystem::path& path);

/// Runs the window converter over each raw document and parses the result
/// into segments.
void structure_documents(std::vector<DocumentRecord>& docs, DocumentConverter& converter, std::size_t window,
                         std::size_t padding, Diagnostics* diagnostics = nullptr);

enum class AugmentMode {
  cascade,  // hierarchical metadata path plus kind-specific augmentation
  none,     // own heading and raw content only
};

struct BuildOptions {
  AugmentMode mode = AugmentMode::cascade;
  bool remove_table_data = true;
  double k1 = Bm25Index::kDefaultK1;
  double b = Bm25Index::kDefaultB;
};

/// Augments already structured documents and builds all three indices.
IndexBundle build_bundle(const std::vector<DocumentRecord>& docs, const Components& components,
                         const BuildOptions& options, Diagnostics* diagnostics = nullptr);

struct IngestReport {
  std::size_t documents = 0;
  std::size_t segments = 0;
  std::size_t vector_entries = 0;
  std::size_t skipped = 0;  // segments left out of the vector index
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct IngestResult {
  IndexBundle bundle;
  IngestReport report;
};

/// load_corpus, structure_documents and build_bundle in one step.
IngestResult ingest_corpus(const AppConfig& config, Components& components);

}  // namespace hiqa
