#include "hiqa/embedder.hpp"

#include <cmath>
#include <cstdint>

#include "hiqa/error.hpp"
#include "hiqa/text.hpp"

namespace hiqa {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidParameter("embedding dimension must be positive");
}

std::string HashingEmbedder::name() const { return "hashing-" + std::to_string(dim_); }

Embedding HashingEmbedder::embed(std::string_view text) const {
  std::vector<double> acc(dim_, 0.0);
  const auto tokens = text::alnum_tokens(text);
  for (const auto& token : tokens) {
    const std::uint64_t h = fnv1a(token);
    acc[h % dim_] += (h >> 63) ? -1.0 : 1.0;
  }
  double sq = 0.0;
  for (double v : acc) sq += v * v;

  Embedding out;
  out.values.assign(dim_, 0.0f);
  // Tokens can cancel within a bucket, so a nonempty token list may still give a zero vector.
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < dim_; ++i) out.values[i] = static_cast<float>(acc[i] * inv);
  out.embeddable = true;
  return out;
}

Embedding embed_default(std::string_view text) {
  static const HashingEmbedder embedder(256);
  return embedder.embed(text);
}

}  // namespace hiqa
