#include "hiqa/hca.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "hiqa/error.hpp"
#include "hiqa/text.hpp"

namespace hiqa {

std::string path_entry(const Segment& seg) {
  if (seg.chapter_number.empty()) return seg.title;
  if (seg.title.empty()) return seg.chapter_number;
  return seg.chapter_number + " " + seg.title;
}

std::string serialize_path(const std::vector<std::string>& path) { return text::join(path, " > "); }

namespace {

bool is_chapter_prefix(std::string_view parent, std::string_view child) {
  return !parent.empty() && child.size() > parent.size() + 1 && child.substr(0, parent.size()) == parent &&
         child[parent.size()] == '.';
}

bool is_structured(const Segment& seg) {
  // Malformed numbers were given level 1 without matching their component count.
  if (seg.chapter_number.empty()) return false;
  const auto dots = std::count(seg.chapter_number.begin(), seg.chapter_number.end(), '.');
  return static_cast<int>(dots) + 1 == seg.level;
}

}  // namespace

SegmentTree build_tree(const DocumentRecord& doc) {
  SegmentTree tree;
  tree.doc_id = doc.doc_id;
  tree.doc_title = doc.title;
  tree.segments = doc.segments;
  tree.images = doc.images;
  tree.nodes.reserve(doc.segments.size() + 1);
  tree.nodes.push_back({doc.title, std::nullopt, {}, std::nullopt});

  std::vector<std::size_t> open;  // node indices on the current root-to-leaf path
  for (std::size_t i = 0; i < tree.segments.size(); ++i) {
    const Segment& seg = tree.segments[i];
    const bool structured = is_structured(seg);
    while (!open.empty()) {
      const Segment& top = tree.segments[*tree.nodes[open.back()].segment];
      if (structured && is_structured(top) && is_chapter_prefix(top.chapter_number, seg.chapter_number)) break;
      open.pop_back();
    }
    const std::size_t parent = open.empty() ? 0 : open.back();
    const std::size_t node = tree.nodes.size();
    tree.nodes.push_back({seg.level == 0 ? doc.title : path_entry(seg), parent, {}, i});
    tree.nodes[parent].children.push_back(node);
    if (seg.level > 0) open.push_back(node);
  }
  return tree;
}

namespace {

std::vector<std::string> split_cells(std::string_view row) {
  row = text::trim(row);
  if (!row.empty() && row.front() == '|') row.remove_prefix(1);
  if (!row.empty() && row.back() == '|') row.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto bar = row.find('|', start);
    cells.emplace_back(text::trim(row.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return cells;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  static const std::regex rule(R"(^:?-+:?$)");
  return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
    return std::regex_match(c, rule);
  });
}

bool is_table_row(std::string_view line) {
  line = text::trim(line);
  return !line.empty() && line.front() == '|';
}

bool is_numeric_cell(std::string_view cell) { return text::has_digit(cell) && !text::has_letter(cell); }

std::vector<std::string_view> nonblank_lines(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto line : text::split_lines(s)) {
    if (!text::trim(line).empty()) out.push_back(line);
  }
  return out;
}

const std::regex& image_ref_pattern() {
  static const std::regex re(R"(!\[([^\]]*)\]\(\s*([^)\s]+)[^)]*\))");
  return re;
}

std::string first_words(std::string_view s, std::size_t limit) {
  const auto words = text::split_words(s);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < words.size() && i < limit; ++i) {
    kept.emplace_back(s.substr(words[i].begin, words[i].end - words[i].begin));
  }
  return text::join(kept, " ");
}

}  // namespace

std::string augment_table(const Segment& seg) {
  if (seg.kind != SegmentKind::table) {
    throw InvalidParameter("augment_table called on a " + std::string(to_string(seg.kind)) + " segment");
  }
  const auto lines = nonblank_lines(seg.content);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_table_row(lines[i])) {
      kept.emplace_back(text::trim(lines[i]));
      continue;
    }
    const auto cells = split_cells(lines[i]);
    if (is_separator_row(cells)) continue;
    const bool is_header = i + 1 < lines.size() && is_table_row(lines[i + 1]) &&
                           is_separator_row(split_cells(lines[i + 1]));
    if (is_header) {
      std::vector<std::string> labels;
      for (const auto& c : cells) {
        if (!c.empty()) labels.push_back(c);
      }
      if (!labels.empty()) kept.push_back(text::join(labels, " "));
    } else if (!cells.empty() && !cells.front().empty() && !is_numeric_cell(cells.front())) {
      kept.push_back(cells.front());
    }
  }
  return text::join(kept, "\n");
}

ImageAugmentation augment_image(const ImageAsset& asset, std::string_view surrounding_text, Captioner* captioner,
                                Diagnostics* diagnostics) {
  std::string description(text::trim(asset.description));
  if (captioner) {
    const std::string caption(text::trim(captioner->caption(asset.file_ref, surrounding_text)));
    if (!caption.empty()) description = description.empty() ? caption : description + " " + caption;
  }
  const std::string context(text::trim(surrounding_text));
  if (description.empty()) {
    warn(diagnostics, "image '" + (asset.image_id.empty() ? asset.file_ref : asset.image_id) +
                          "' has no description and no captioner; excluded from the vector index");
    return {context, false};
  }
  return {context.empty() ? description : description + "\n" + context, true};
}

std::string plain_embedding_text(const Segment& seg) {
  const std::string entry = path_entry(seg);
  return entry.empty() ? seg.content : entry + "\n" + seg.content;
}

namespace {

// Body of the embedding text for one segment, by kind.
std::pair<std::string, bool> augmented_body(const SegmentTree& tree, const Segment& seg, const AugmentOptions& options) {
  switch (seg.kind) {
    case SegmentKind::text:
      return {seg.content, true};
    case SegmentKind::table:
      return {options.remove_table_data ? augment_table(seg) : seg.content, true};
    case SegmentKind::image: {
      std::smatch m;
      const std::string& content = seg.content;
      if (!std::regex_search(content, m, image_ref_pattern())) return {content, true};
      const std::string alt = m[1].str();
      const std::string ref = m[2].str();
      ImageAsset asset{ref, ref, alt};
      const auto found = std::find_if(tree.images.begin(), tree.images.end(), [&](const ImageAsset& a) {
        return a.file_ref == ref || a.image_id == ref;
      });
      if (found != tree.images.end()) asset = *found;
      const std::string surrounding = m.prefix().str() + " " + m.suffix().str();
      auto aug = augment_image(asset, first_words(surrounding, options.image_context_words), options.captioner,
                               options.diagnostics);
      return {std::move(aug.text), aug.indexable};
    }
  }
  return {seg.content, true};
}

}  // namespace

std::vector<Segment> cascade_metadata(const SegmentTree& tree, const AugmentOptions& options) {
  std::vector<Segment> out = tree.segments;
  if (tree.nodes.empty()) return out;

  struct Frame {
    std::size_t node;
    std::vector<std::string> path;
  };
  std::vector<Frame> stack;
  stack.push_back({0, {tree.doc_title}});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& node = tree.nodes[frame.node];
    if (node.segment) {
      Segment& seg = out[*node.segment];
      const auto [body, indexable] = augmented_body(tree, tree.segments[*node.segment], options);
      seg.metadata_path = frame.path;
      seg.embedding_text = serialize_path(frame.path) + "\n" + body;
      seg.vector_indexable = indexable;
    }
    // Reverse push keeps the pre-order visit in document order.
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      std::vector<std::string> child_path = frame.path;
      const auto& child = tree.nodes[*it];
      if (child.segment && tree.segments[*child.segment].level > 0) child_path.push_back(child.label);
      stack.push_back({*it, std::move(child_path)});
    }
  }
  return out;
}

}  // namespace hiqa
