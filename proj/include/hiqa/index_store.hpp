#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hiqa/corpus.hpp"
#include "hiqa/index.hpp"

namespace hiqa {

/// Everything a query needs: augmented segments and the three retrieval substrates.
struct IndexBundle {
  std::string embedder_name;
  std::vector<CorpusSegment> segments;
  VectorIndex vectors;
  Bm25Index bm25;
  KeywordTable keywords;

  bool operator==(const IndexBundle&) const = default;
};

inline constexpr int kIndexFormatVersion = 1;
inline constexpr char kVectorMagic[] = "HIQA1";  // 5 bytes on disk, no terminator

/// Writes manifest.json, vectors.bin, postings.json, keywords.json and
/// segments.json into dir (created if needed). Output depends only on the
/// bundle, so saving the same bundle twice gives identical bytes.
void save_index(const IndexBundle& bundle, const std::filesystem::path& dir);

/// Throws DataError for a missing directory, wrong magic or version, or
/// files that disagree with the manifest.
IndexBundle load_index(const std::filesystem::path& dir);

}  // namespace hiqa
