#include "hiqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hiqa/text.hpp"

namespace hiqa {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::text:
      return "text";
    case SegmentKind::table:
      return "table";
    case SegmentKind::image:
      return "image";
  }
  return "text";
}

SegmentKind segment_kind_from_string(std::string_view s) {
  if (s == "text") return SegmentKind::text;
  if (s == "table") return SegmentKind::table;
  if (s == "image") return SegmentKind::image;
  throw DataError("unknown segment kind '" + std::string(s) + "'");
}

std::string segment_key(std::string_view doc_id, std::string_view segment_id) {
  std::string key;
  key.reserve(doc_id.size() + segment_id.size() + 1);
  key.append(doc_id).push_back('#');
  key.append(segment_id);
  return key;
}

namespace {

struct ManifestEntry {
  std::optional<std::string> id;
  std::optional<std::string> title;
};

std::string read_file(const fs::path& path, const std::string& rel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusFileError(rel, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw CorpusFileError(rel, "read failed");
  return ss.str();
}

json parse_json_file(const fs::path& path, const std::string& rel) {
  const std::string body = read_file(path, rel);
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw CorpusFileError(rel, std::string("invalid JSON: ") + e.what());
  }
}

bool is_document(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".md" || ext == ".txt";
}

std::string strip_extension(const std::string& rel) {
  const auto slash = rel.find_last_of('/');
  const auto dot = rel.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return rel;
  return rel.substr(0, dot);
}

std::map<std::string, ManifestEntry> read_manifest(const fs::path& manifest) {
  const std::string rel = manifest.string();
  const json j = parse_json_file(manifest, rel);
  if (!j.is_object() || !j.contains("documents") || !j["documents"].is_array()) {
    throw CorpusFileError(rel, "manifest must be an object with a 'documents' array");
  }
  std::map<std::string, ManifestEntry> out;
  for (const auto& d : j["documents"]) {
    if (!d.is_object() || !d.contains("path") || !d["path"].is_string()) {
      throw CorpusFileError(rel, "manifest entry without a 'path' string");
    }
    ManifestEntry e;
    if (d.contains("id")) e.id = d["id"].get<std::string>();
    if (d.contains("title")) e.title = d["title"].get<std::string>();
    out[fs::path(d["path"].get<std::string>()).lexically_normal().generic_string()] = std::move(e);
  }
  return out;
}

void apply_sidecar(DocumentRecord& doc, const fs::path& sidecar, const std::string& rel) {
  const json j = parse_json_file(sidecar, rel);
  if (!j.is_object()) throw CorpusFileError(rel, "sidecar must be a JSON object");
  try {
    if (j.contains("title")) doc.title = j["title"].get<std::string>();
    if (j.contains("images")) {
      for (const auto& img : j["images"]) {
        ImageAsset asset;
        asset.image_id = img.value("id", std::string());
        asset.file_ref = img.value("file", std::string());
        asset.description = img.value("description", std::string());
        if (asset.image_id.empty()) asset.image_id = asset.file_ref;
        doc.images.push_back(std::move(asset));
      }
    }
  } catch (const json::exception& e) {
    throw CorpusFileError(rel, std::string("bad sidecar field: ") + e.what());
  }
}

}  // namespace

std::vector<DocumentRecord> load_corpus(const fs::path& root_dir, const std::optional<fs::path>& manifest) {
  std::error_code ec;
  if (!fs::is_directory(root_dir, ec)) {
    throw DataError("corpus directory does not exist: " + root_dir.string());
  }

  std::optional<std::map<std::string, ManifestEntry>> listed;
  if (manifest) listed = read_manifest(*manifest);

  std::vector<std::string> rels;
  for (auto it = fs::recursive_directory_iterator(root_dir, fs::directory_options::none, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_regular_file(ec) || !is_document(it->path())) continue;
    rels.push_back(it->path().lexically_relative(root_dir).generic_string());
  }
  if (ec) throw DataError("cannot list corpus directory " + root_dir.string() + ": " + ec.message());
  std::sort(rels.begin(), rels.end());

  if (listed) {
    for (const auto& [path, entry] : *listed) {
      if (!std::binary_search(rels.begin(), rels.end(), path)) {
        throw CorpusFileError(path, "listed in manifest but not found");
      }
    }
  }

  std::vector<DocumentRecord> docs;
  std::set<std::string> seen;
  for (const auto& rel : rels) {
    const ManifestEntry* entry = nullptr;
    if (listed) {
      auto found = listed->find(rel);
      if (found == listed->end()) continue;
      entry = &found->second;
    }
    const fs::path full = root_dir / fs::path(rel);

    DocumentRecord doc;
    doc.source_path = rel;
    doc.doc_id = strip_extension(rel);
    doc.title = full.stem().string();
    doc.raw_text = read_file(full, rel);
    if (!text::is_valid_utf8(doc.raw_text)) throw CorpusFileError(rel, "not valid UTF-8");

    fs::path sidecar = full;
    sidecar.replace_extension(".meta.json");
    if (fs::exists(sidecar, ec)) {
      apply_sidecar(doc, sidecar, strip_extension(rel) + ".meta.json");
    }
    if (entry) {
      if (entry->id) doc.doc_id = *entry->id;
      if (entry->title) doc.title = *entry->title;
    }
    if (!seen.insert(doc.doc_id).second) {
      throw DataError("duplicate doc_id '" + doc.doc_id + "' (" + rel + ")");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void check_unique_keys(const std::vector<DocumentRecord>& docs) {
  std::set<std::string> keys;
  for (const auto& doc : docs) {
    for (const auto& seg : doc.segments) {
      const auto key = segment_key(doc.doc_id, seg.segment_id);
      if (!keys.insert(key).second) throw DataError("duplicate segment key '" + key + "'");
    }
  }
}

}  // namespace hiqa

namespace hiqa {

std::vector<CorpusSegment> flatten(const std::vector<DocumentRecord>& docs) {
  std::vector<CorpusSegment> out;
  for (const auto& doc : docs) {
    for (const auto& seg : doc.segments) out.push_back({doc.doc_id, seg});
  }
  return out;
}

}  // namespace hiqa
