#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hiqa/corpus.hpp"
#include "hiqa/diagnostics.hpp"

namespace hiqa {

/// Chapter hierarchy of one document. Node 0 is the root (document title).
struct SegmentTree {
  struct Node {
    std::string label;                   // path entry contributed by this node
    std::optional<std::size_t> parent;   // empty for the root
    std::vector<std::size_t> children;   // in document order
    std::optional<std::size_t> segment;  // index into `segments`, empty for the root
  };

  std::string doc_id;
  std::string doc_title;
  std::vector<Segment> segments;
  std::vector<ImageAsset> images;
  std::vector<Node> nodes;

  const Node& root() const { return nodes.front(); }
  /// Node holding segments[i].
  std::size_t node_of(std::size_t segment_index) const { return segment_index + 1; }
};

/// Path entry for a chapter: "<chapter_number> <title>", or the bare title if unnumbered.
std::string path_entry(const Segment& seg);

/// Joins path entries with " > ".
std::string serialize_path(const std::vector<std::string>& path);

/// Links each segment to the deepest open chapter whose number is a proper
/// prefix of its own ("1.2.1" goes under "1.2", or under "1" if there is no
/// "1.2"). A pre-order walk visits segments in document order.
SegmentTree build_tree(const DocumentRecord& doc);

/// Describes an image, e.g. with a visual-language model.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(std::string_view file_ref, std::string_view context) = 0;
};

struct AugmentOptions {
  Captioner* captioner = nullptr;
  Diagnostics* diagnostics = nullptr;
  /// Drop table data cells from the embedding text.
  bool remove_table_data = true;
  /// Words of surrounding text kept with an image description.
  std::size_t image_context_words = 64;
};

/// Fills metadata_path and embedding_text of every segment by a depth-first
/// walk that passes the root-to-node path down the tree. Output is in
/// document order. Idempotent.
std::vector<Segment> cascade_metadata(const SegmentTree& tree, const AugmentOptions& options = {});

/// Caption and description lines, the header row and the first-column row
/// labels of every table in a table segment. Numeric data cells are dropped.
/// Without a header row only captions and first-column labels remain.
/// Throws InvalidParameter if seg is not a table.
std::string augment_table(const Segment& seg);

struct ImageAugmentation {
  std::string text;
  bool indexable = true;  // false when nothing describes the image
};

/// Description (plus captioner output) followed by the surrounding text.
ImageAugmentation augment_image(const ImageAsset& asset, std::string_view surrounding_text, Captioner* captioner,
                                Diagnostics* diagnostics = nullptr);

/// Text a plain chunker would embed: the segment's own heading entry and its
/// raw content, with no ancestors and no document title.
std::string plain_embedding_text(const Segment& seg);

}  // namespace hiqa
