#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hiqa/corpus.hpp"
#include "hiqa/diagnostics.hpp"
#include "hiqa/error.hpp"

namespace hiqa {

/// Half-open word range [begin, end).
struct WordRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const WordRange&) const = default;
};

/// Sliding-window schedule: step W, padding K on both sides, T = ceil(N / W) turns.
struct WindowPlan {
  std::size_t window_size = 0;
  std::size_t padding = 0;
  std::size_t total_words = 0;
  std::size_t iterations = 0;
  std::vector<WordRange> spans;  // padded, clipped to [0, N)
  std::vector<WordRange> cores;  // unpadded, tile [0, N)
};

/// Throws InvalidParameter when window_size == 0.
WindowPlan plan_windows(std::size_t total_words, std::size_t window_size, std::size_t padding);

/// Input of one conversion turn. Turn 1 has empty previous_* fields.
struct ConverterTurn {
  std::size_t turn = 0;  // 1-based
  std::string current_input;   // padded window text
  std::string previous_input;  // previous turn's current_input
  std::string previous_output; // previous turn's returned fragment
  // Byte range of the core inside current_input. Only the core may be emitted.
  std::size_t core_begin = 0;
  std::size_t core_end = 0;

  std::string_view core() const {
    return std::string_view(current_input).substr(core_begin, core_end - core_begin);
  }
};

/// Turns one window of raw document text into a markdown fragment.
class DocumentConverter {
 public:
  virtual ~DocumentConverter() = default;
  virtual std::string convert(const ConverterTurn& turn) = 0;
};

/// Raised when a converter fails mid-document; carries what was produced so far.
class ConversionError : public Error {
 public:
  ConversionError(std::size_t turn, std::string partial, const std::string& cause)
      : Error("conversion failed at turn " + std::to_string(turn) + ": " + cause),
        turn_(turn),
        partial_(std::move(partial)) {}
  std::size_t turn() const noexcept { return turn_; }
  const std::string& partial_output() const noexcept { return partial_; }

 private:
  std::size_t turn_;
  std::string partial_;
};

/// Runs the converter turn by turn and concatenates fragments in order.
///
/// Cores are cut at word starts so that they tile the whole byte range of
/// doc_text, whitespace included. The plan must have been built for
/// count_words(doc_text) words.
std::string convert_document(std::string_view doc_text, DocumentConverter& converter, const WindowPlan& plan);

/// Echoes the core unchanged.
class IdentityConverter final : public DocumentConverter {
 public:
  std::string convert(const ConverterTurn& turn) override { return std::string(turn.core()); }
};

/// Deterministic stand-in for a language-model converter.
///
/// Rewrites heading-like lines that start inside the core into the flat
/// "# <number> <title>" form: numbered markdown headings at any depth,
/// unnumbered markdown headings (numbered from running counters), and plain
/// lines such as "3.2 Electrical Characteristics". Everything else passes
/// through. Padding is used to see the full text of a line that crosses the
/// core end. Counters reset when turn 1 arrives.
class RuleBasedConverter final : public DocumentConverter {
 public:
  std::string convert(const ConverterTurn& turn) override;

 private:
  // Replace the first `consumed` bytes of a heading line with `replacement`.
  struct Promotion {
    std::size_t consumed = 0;
    std::string replacement;
  };
  std::optional<Promotion> promote(std::string_view line);

  std::vector<int> counters_;
  std::size_t pending_skip_ = 0;  // bytes of a rewritten heading prefix that spill into the next core
};

struct HeadingParse {
  bool is_heading = false;
  bool malformed = false;
  std::string chapter_number;
  int level = 0;
  std::string title;
};

/// Parses a "# <n>(.<n>)* <title>" line.
HeadingParse parse_heading_line(std::string_view line);

/// Splits flat-heading markdown into segments.
///
/// Lines before the first heading become a level-0 preamble titled with
/// doc_title (skipped when blank). A heading whose number has a
/// non-numeric component is kept at level 1 with a warning. A segment is a
/// table if any line is a table row or a "Table ...:" caption, an image if
/// any line is an image reference, and text otherwise.
std::vector<Segment> parse_markdown(std::string_view markdown, std::string_view doc_title,
                                    Diagnostics* diagnostics = nullptr);

}  // namespace hiqa
