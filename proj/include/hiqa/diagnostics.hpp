#pragma once

#include <string>
#include <vector>

namespace hiqa {

/// Collects non-fatal warnings raised while processing a corpus.
class Diagnostics {
 public:
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t count() const noexcept { return warnings_.size(); }
  void clear() { warnings_.clear(); }

 private:
  std::vector<std::string> warnings_;
};

inline void warn(Diagnostics* d, std::string message) {
  if (d) d->warn(std::move(message));
}

}  // namespace hiqa
