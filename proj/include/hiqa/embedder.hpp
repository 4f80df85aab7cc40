#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hiqa {

using Vector = std::vector<float>;

struct Embedding {
  Vector values;
  bool embeddable = false;  // false for text without a single token
};

/// Maps text to a fixed-dimension unit vector. Must be deterministic.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
  /// Recorded in the index manifest.
  virtual std::string name() const = 0;
};

/// Signed feature hashing over case-folded alphanumeric tokens, L2-normalised.
///
/// Each token t adds sign(t) to bucket h(t) mod dim, with h a 64-bit FNV-1a
/// hash and the sign taken from its top bit.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;
  std::string name() const override;

 private:
  std::size_t dim_;
};

/// HashingEmbedder with dimension 256.
Embedding embed_default(std::string_view text);

}  // namespace hiqa
