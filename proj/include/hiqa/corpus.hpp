#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hiqa/error.hpp"

namespace hiqa {

enum class SegmentKind { text, table, image };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view s);

/// One chapter-level knowledge unit.
struct Segment {
  std::string segment_id;
  std::string chapter_number;  // dotted numeric, "" for the preamble
  int level = 0;               // dot-component count of chapter_number
  std::string title;
  SegmentKind kind = SegmentKind::text;
  std::string heading;  // raw heading line, empty for the preamble
  std::string content;
  std::string embedding_text;              // filled by augmentation
  std::vector<std::string> metadata_path;  // filled by augmentation
  bool vector_indexable = true;            // false when augmentation could not describe it

  bool operator==(const Segment&) const = default;
};

struct ImageAsset {
  std::string image_id;
  std::string file_ref;
  std::string description;

  bool operator==(const ImageAsset&) const = default;
};

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::string source_path;  // relative to the corpus root, '/'-separated
  std::string raw_text;
  std::vector<Segment> segments;
  std::vector<ImageAsset> images;

  bool operator==(const DocumentRecord&) const = default;
};

/// Reading or validating a single corpus file failed.
class CorpusFileError : public DataError {
 public:
  CorpusFileError(std::string path, const std::string& what)
      : DataError(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Segment key used by every index: "doc_id#segment_id".
std::string segment_key(std::string_view doc_id, std::string_view segment_id);

/// Loads every .md/.txt file under root_dir (recursively), ordered by relative path.
///
/// A sidecar "<stem>.meta.json" next to a document may provide
/// {"title": ..., "images": [{"id", "file", "description"}]}; without one
/// the title is the filename stem. doc_id is the relative path without its
/// extension. The optional manifest is a JSON file
/// {"documents": [{"path": "a.md", "id": "...", "title": "..."}]} that
/// restricts loading to the listed files and may override id and title.
///
/// Throws CorpusFileError for an unreadable or non-UTF-8 file and DataError
/// for duplicate doc ids or a missing root.
std::vector<DocumentRecord> load_corpus(const std::filesystem::path& root_dir,
                                        const std::optional<std::filesystem::path>& manifest = std::nullopt);

/// Throws DataError if any (doc_id, segment_id) pair repeats.
void check_unique_keys(const std::vector<DocumentRecord>& docs);

}  // namespace hiqa

namespace hiqa {

/// A segment together with the document it belongs to.
struct CorpusSegment {
  std::string doc_id;
  Segment segment;

  std::string key() const { return segment_key(doc_id, segment.segment_id); }
  bool operator==(const CorpusSegment&) const = default;
};

/// All segments of all documents, in corpus then document order.
std::vector<CorpusSegment> flatten(const std::vector<DocumentRecord>& docs);

}  // namespace hiqa
