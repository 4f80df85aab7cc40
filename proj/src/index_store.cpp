#include "hiqa/index_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hiqa/error.hpp"

namespace hiqa {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMagicLen = 5;
constexpr const char* kManifest = "manifest.json";
constexpr const char* kVectors = "vectors.bin";
constexpr const char* kPostings = "postings.json";
constexpr const char* kKeywords = "keywords.json";
constexpr const char* kSegments = "segments.json";

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing index file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("corrupt index file " + path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void put_f32_le(std::string& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

float get_f32_le(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

json segment_to_json(const CorpusSegment& cs) {
  const Segment& s = cs.segment;
  return json{{"doc_id", cs.doc_id},
              {"segment_id", s.segment_id},
              {"chapter_number", s.chapter_number},
              {"level", s.level},
              {"title", s.title},
              {"kind", std::string(to_string(s.kind))},
              {"heading", s.heading},
              {"content", s.content},
              {"embedding_text", s.embedding_text},
              {"metadata_path", s.metadata_path},
              {"vector_indexable", s.vector_indexable}};
}

CorpusSegment segment_from_json(const json& j) {
  CorpusSegment cs;
  cs.doc_id = j.at("doc_id").get<std::string>();
  Segment& s = cs.segment;
  s.segment_id = j.at("segment_id").get<std::string>();
  s.chapter_number = j.at("chapter_number").get<std::string>();
  s.level = j.at("level").get<int>();
  s.title = j.at("title").get<std::string>();
  s.kind = segment_kind_from_string(j.at("kind").get<std::string>());
  s.heading = j.at("heading").get<std::string>();
  s.content = j.at("content").get<std::string>();
  s.embedding_text = j.at("embedding_text").get<std::string>();
  s.metadata_path = j.at("metadata_path").get<std::vector<std::string>>();
  s.vector_indexable = j.at("vector_indexable").get<bool>();
  return cs;
}

}  // namespace

void save_index(const IndexBundle& bundle, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create index directory " + dir.string() + ": " + ec.message());

  const auto& v = bundle.vectors;
  if (v.data.size() != v.keys.size() * v.dim) throw DataError("vector index shape is inconsistent");

  std::vector<std::string> segment_keys;
  json segments = json::array();
  for (const auto& cs : bundle.segments) {
    segment_keys.push_back(cs.key());
    segments.push_back(segment_to_json(cs));
  }

  json manifest{{"format", "hiqa-index"},
                {"version", kIndexFormatVersion},
                {"embedder", bundle.embedder_name},
                {"dim", v.dim},
                {"k1", bundle.bm25.k1()},
                {"b", bundle.bm25.b()},
                {"segment_keys", segment_keys},
                {"bm25_keys", bundle.bm25.keys()},
                {"vector_keys", v.keys},
                {"files",
                 {{"vectors", kVectors}, {"postings", kPostings}, {"keywords", kKeywords}, {"segments", kSegments}}}};

  std::string blob(kVectorMagic, kMagicLen);
  blob.reserve(kMagicLen + v.data.size() * 4);
  for (float f : v.data) put_f32_le(blob, f);

  json postings = json::object();
  for (const auto& [term, list] : bundle.bm25.postings()) {
    json arr = json::array();
    for (const auto& p : list) arr.push_back({p.doc, p.tf});
    postings[term] = std::move(arr);
  }
  json postings_file{{"doc_lengths", bundle.bm25.doc_lengths()}, {"postings", std::move(postings)}};

  json keywords = json::object();
  for (const auto& [key, set] : bundle.keywords.keywords) keywords[key] = set;

  write_file(dir / kVectors, blob);
  write_file(dir / kPostings, dump(postings_file));
  write_file(dir / kKeywords, dump(keywords));
  write_file(dir / kSegments, dump(segments));
  write_file(dir / kManifest, dump(manifest));
}

IndexBundle load_index(const fs::path& dir) {
  if (!fs::exists(dir / kManifest)) {
    throw DataError("no index found at " + dir.string() + " (run 'hiqa ingest' first)");
  }
  const json manifest = read_json(dir / kManifest);
  if (manifest.value("format", "") != "hiqa-index") throw DataError("not a hiqa index manifest");
  if (manifest.value("version", -1) != kIndexFormatVersion) {
    throw DataError("unsupported index version " + manifest.value("version", json()).dump() + ", expected " +
                    std::to_string(kIndexFormatVersion));
  }

  IndexBundle bundle;
  try {
    bundle.embedder_name = manifest.at("embedder").get<std::string>();
    const auto dim = manifest.at("dim").get<std::size_t>();
    const auto k1 = manifest.at("k1").get<double>();
    const auto b = manifest.at("b").get<double>();
    const auto segment_keys = manifest.at("segment_keys").get<std::vector<std::string>>();
    auto bm25_keys = manifest.at("bm25_keys").get<std::vector<std::string>>();

    const std::string blob = read_file(dir / kVectors);
    if (blob.size() < kMagicLen || std::memcmp(blob.data(), kVectorMagic, kMagicLen) != 0) {
      throw DataError("bad magic in " + (dir / kVectors).string());
    }
    bundle.vectors.dim = dim;
    bundle.vectors.keys = manifest.at("vector_keys").get<std::vector<std::string>>();
    const std::size_t count = bundle.vectors.keys.size() * dim;
    if (blob.size() != kMagicLen + count * 4) throw DataError("vector blob size does not match the manifest");
    bundle.vectors.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) bundle.vectors.data[i] = get_f32_le(blob.data() + kMagicLen + 4 * i);

    const json postings_file = read_json(dir / kPostings);
    auto lengths = postings_file.at("doc_lengths").get<std::vector<std::uint32_t>>();
    std::map<std::string, std::vector<Posting>> postings;
    for (const auto& [term, arr] : postings_file.at("postings").items()) {
      auto& list = postings[term];
      for (const auto& p : arr) list.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
    }
    bundle.bm25 = Bm25Index(k1, b, std::move(bm25_keys), std::move(lengths), std::move(postings));

    const json keywords = read_json(dir / kKeywords);
    for (const auto& [key, arr] : keywords.items()) {
      bundle.keywords.keywords[key] = arr.get<std::set<std::string>>();
    }

    const json segments = read_json(dir / kSegments);
    for (const auto& s : segments) bundle.segments.push_back(segment_from_json(s));
    if (bundle.segments.size() != segment_keys.size()) throw DataError("segments.json disagrees with the manifest");
    for (std::size_t i = 0; i < segment_keys.size(); ++i) {
      if (bundle.segments[i].key() != segment_keys[i]) throw DataError("segments.json disagrees with the manifest");
    }
  } catch (const json::exception& e) {
    throw DataError("corrupt index in " + dir.string() + ": " + e.what());
  } catch (const InvalidParameter& e) {
    throw DataError("corrupt index in " + dir.string() + ": " + e.what());
  }
  return bundle;
}

}  // namespace hiqa
