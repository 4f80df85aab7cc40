#pragma once

// Out-of-process plug-ins. Each adapter starts `sh -c <command>` once and
// exchanges one JSON object per line over the child's stdin/stdout:
//
//   embedder    {"text": ...}                        -> {"vector": [...]}
//   keywords    {"text": ...}                        -> {"keywords": [...]}
//   captioner   {"file": ..., "text": context}       -> {"description": ...}
//   converter   {"turn", "current_input", "previous_input",
//                "previous_output", "core_begin", "core_end"}  -> {"markdown": ...}
//   answerer    {"query": ..., "context": [...]}     -> {"answer": ...}
//
// A response of the form {"error": "..."} is raised as a PluginError.

#include <memory>
#include <mutex>
#include <set>
#include <string>

#include <json.hpp>

#include "hiqa/embedder.hpp"
#include "hiqa/error.hpp"
#include "hiqa/formatter.hpp"
#include "hiqa/hca.hpp"
#include "hiqa/index.hpp"

namespace hiqa {

class PluginError : public DataError {
 public:
  using DataError::DataError;
};

/// A child process speaking line-delimited JSON. Not thread-safe on its own.
class ProcessChannel {
 public:
  explicit ProcessChannel(std::string command);
  ~ProcessChannel();
  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  nlohmann::json request(const nlohmann::json& message);
  const std::string& command() const { return command_; }

 private:
  void write_all(const std::string& bytes);
  std::string read_line();

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

class ProcessEmbedder final : public Embedder {
 public:
  ProcessEmbedder(std::string command, std::size_t dim);
  std::size_t dim() const override { return dim_; }
  /// The returned vector is L2-normalised here; a zero vector is unembeddable.
  Embedding embed(std::string_view text) const override;
  std::string name() const override;

 private:
  std::size_t dim_;
  mutable std::mutex mutex_;
  mutable ProcessChannel channel_;
};

class ProcessKeywordExtractor final : public KeywordExtractor {
 public:
  explicit ProcessKeywordExtractor(std::string command) : channel_(std::move(command)) {}
  std::set<std::string> extract(std::string_view text) const override;

 private:
  mutable std::mutex mutex_;
  mutable ProcessChannel channel_;
};

class ProcessCaptioner final : public Captioner {
 public:
  explicit ProcessCaptioner(std::string command) : channel_(std::move(command)) {}
  std::string caption(std::string_view file_ref, std::string_view context) override;

 private:
  ProcessChannel channel_;
};

class ProcessConverter final : public DocumentConverter {
 public:
  explicit ProcessConverter(std::string command) : channel_(std::move(command)) {}
  std::string convert(const ConverterTurn& turn) override;

 private:
  ProcessChannel channel_;
};

/// Hands a retrieved context bundle to an external answer generator.
class ProcessAnswerer {
 public:
  explicit ProcessAnswerer(std::string command) : channel_(std::move(command)) {}
  std::string answer(const nlohmann::json& context_bundle);

 private:
  ProcessChannel channel_;
};

}  // namespace hiqa
