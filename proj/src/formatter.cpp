#include "hiqa/formatter.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

#include "hiqa/text.hpp"

namespace hiqa {

WindowPlan plan_windows(std::size_t total_words, std::size_t window_size, std::size_t padding) {
  if (window_size == 0) throw InvalidParameter("window size W must be at least 1");
  WindowPlan plan;
  plan.window_size = window_size;
  plan.padding = padding;
  plan.total_words = total_words;
  plan.iterations = (total_words + window_size - 1) / window_size;
  plan.spans.reserve(plan.iterations);
  plan.cores.reserve(plan.iterations);
  for (std::size_t t = 0; t < plan.iterations; ++t) {
    const std::size_t core_begin = t * window_size;
    const std::size_t core_end = std::min(total_words, core_begin + window_size);
    const std::size_t span_begin = core_begin > padding ? core_begin - padding : 0;
    const std::size_t span_end = std::min(total_words, core_begin + window_size + padding);
    plan.cores.push_back({core_begin, core_end});
    plan.spans.push_back({span_begin, span_end});
  }
  return plan;
}

std::string convert_document(std::string_view doc_text, DocumentConverter& converter, const WindowPlan& plan) {
  const auto words = text::split_words(doc_text);
  if (words.size() != plan.total_words) {
    throw InvalidParameter("window plan was built for " + std::to_string(plan.total_words) +
                           " words, document has " + std::to_string(words.size()));
  }
  const std::size_t n = words.size();
  // Byte offset where word i starts; cuts at 0 and N cover leading and trailing whitespace.
  auto cut = [&](std::size_t i) -> std::size_t {
    if (i == 0) return 0;
    if (i >= n) return doc_text.size();
    return words[i].begin;
  };

  std::string output;
  ConverterTurn turn;
  for (std::size_t t = 0; t < plan.iterations; ++t) {
    const std::size_t span_begin = cut(plan.spans[t].begin);
    const std::size_t span_end = cut(plan.spans[t].end);
    const std::size_t core_begin = cut(plan.cores[t].begin);
    const std::size_t core_end = cut(plan.cores[t].end);

    ConverterTurn next;
    next.turn = t + 1;
    next.current_input = std::string(doc_text.substr(span_begin, span_end - span_begin));
    next.core_begin = core_begin - span_begin;
    next.core_end = core_end - span_begin;
    if (t > 0) {
      next.previous_input = std::move(turn.current_input);
      next.previous_output = std::move(turn.previous_output);
    }
    turn = std::move(next);

    std::string fragment;
    try {
      fragment = converter.convert(turn);
    } catch (const std::exception& e) {
      throw ConversionError(t + 1, output, e.what());
    }
    output += fragment;
    // Held until the next turn moves it into previous_output.
    turn.previous_output = std::move(fragment);
  }
  return output;
}

namespace {

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Components of a dotted number, or nullopt if any component is not all digits.
std::optional<std::vector<int>> dotted_components(std::string_view token) {
  std::vector<int> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = token.find('.', start);
    const auto part = token.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (!is_digits(part) || part.size() > 6) return std::nullopt;
    parts.push_back(std::stoi(std::string(part)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

std::string dotted(const std::vector<int>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(parts[i]);
  }
  return out;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::size_t skip_blanks(std::string_view s, std::size_t i) {
  while (i < s.size() && is_blank(s[i])) ++i;
  return i;
}

std::size_t token_end(std::string_view s, std::size_t i) {
  while (i < s.size() && !is_blank(s[i]) && s[i] != '\r') ++i;
  return i;
}

bool looks_like_title(std::string_view title) {
  title = text::trim(title);
  if (title.empty() || title.size() > 120) return false;
  const auto first = static_cast<unsigned char>(title.front());
  if (first < 0x80 && !std::isupper(first)) return false;
  const char last = title.back();
  if (last == '.' || last == ',' || last == ';' || last == ':') return false;
  return text::count_words(title) <= 12;
}

}  // namespace

std::string RuleBasedConverter::convert(const ConverterTurn& turn) {
  if (turn.turn == 1) {
    counters_.clear();
    pending_skip_ = 0;
  }
  const std::string_view input = turn.current_input;

  bool at_line_start;
  if (turn.core_begin > 0) {
    at_line_start = input[turn.core_begin - 1] == '\n';
  } else {
    at_line_start = turn.previous_input.empty() || turn.previous_input.back() == '\n';
  }

  std::string out;
  std::size_t pos = turn.core_begin;
  if (pending_skip_ > 0) {
    // The previous turn already rewrote the start of this line.
    const std::size_t n = std::min(pending_skip_, turn.core_end - turn.core_begin);
    pos += n;
    pending_skip_ -= n;
    at_line_start = false;
  }
  while (pos < turn.core_end) {
    const auto nl = input.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? input.size() : nl;
    const std::size_t emit_end = std::min(nl == std::string_view::npos ? input.size() : nl + 1, turn.core_end);
    std::size_t copy_from = pos;
    if (at_line_start) {
      if (auto p = promote(input.substr(pos, line_end - pos))) {
        out += p->replacement;
        if (pos + p->consumed > emit_end) pending_skip_ = pos + p->consumed - emit_end;
        copy_from = std::min(pos + p->consumed, emit_end);
      }
    }
    out.append(input.substr(copy_from, emit_end - copy_from));
    at_line_start = nl != std::string_view::npos && nl < turn.core_end;
    pos = emit_end;
  }
  return out;
}

// Advances the running counters for every heading it recognises.
std::optional<RuleBasedConverter::Promotion> RuleBasedConverter::promote(std::string_view line) {
  auto encode = [](std::string replacement, std::size_t consumed) {
    return Promotion{consumed, std::move(replacement)};
  };

  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes > 0) {
    if (hashes > 6 || hashes >= line.size() || !is_blank(line[hashes])) return std::nullopt;
    const std::size_t rest = skip_blanks(line, hashes);
    if (text::trim(line.substr(rest)).empty()) return std::nullopt;
    const std::size_t tok_end = token_end(line, rest);
    const auto token = line.substr(rest, tok_end - rest);
    if (auto parts = dotted_components(token); parts && tok_end < line.size() && is_blank(line[tok_end])) {
      counters_ = *parts;
      if (hashes == 1 && rest == 2 && tok_end + 1 < line.size() && !is_blank(line[tok_end + 1])) return std::nullopt;
      return encode("# " + dotted(*parts) + " ", skip_blanks(line, tok_end));
    }
    // A malformed number on a flat heading is left for the parser to flag.
    if (hashes == 1 && text::has_digit(token)) return std::nullopt;
    const auto depth = static_cast<std::size_t>(hashes);
    if (counters_.size() >= depth) {
      counters_.resize(depth);
      ++counters_.back();
    } else {
      while (counters_.size() + 1 < depth) counters_.push_back(1);
      counters_.push_back(1);
    }
    return encode("# " + dotted(counters_) + " ", rest);
  }

  // Plain numbered line: "3.2 Electrical Characteristics".
  const std::size_t tok_end = token_end(line, 0);
  if (tok_end == 0 || tok_end >= line.size() || !is_blank(line[tok_end])) return std::nullopt;
  const auto parts = dotted_components(line.substr(0, tok_end));
  if (!parts || (*parts)[0] > 99) return std::nullopt;
  const std::size_t title_begin = skip_blanks(line, tok_end);
  if (!looks_like_title(line.substr(title_begin))) return std::nullopt;
  counters_ = *parts;
  return encode("# ", 0);
}

HeadingParse parse_heading_line(std::string_view line) {
  HeadingParse h;
  line = text::trim_right(line);
  if (line.size() < 2 || line[0] != '#' || !is_blank(line[1])) {
    if (line == "#") {
      h.is_heading = h.malformed = true;
      h.level = 1;
    }
    return h;
  }
  h.is_heading = true;
  const std::size_t rest = skip_blanks(line, 1);
  const std::size_t tok_end = token_end(line, rest);
  const auto token = line.substr(rest, tok_end - rest);
  const auto title = text::trim(line.substr(tok_end));
  if (auto parts = dotted_components(token)) {
    h.chapter_number = std::string(token);
    h.level = static_cast<int>(parts->size());
    h.title = std::string(title);
    return h;
  }
  h.malformed = true;
  h.level = 1;
  if (text::has_digit(token)) {
    h.chapter_number = std::string(token);
    h.title = std::string(title);
  } else {
    h.title = std::string(text::trim(line.substr(rest)));
  }
  return h;
}

namespace {

SegmentKind detect_kind(std::string_view content) {
  static const std::regex caption(R"(^table\b[^:]{0,24}:)", std::regex::icase);
  bool image = false;
  for (auto line : text::split_lines(content)) {
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '|') return SegmentKind::table;
    if (std::regex_search(line.begin(), line.end(), caption)) return SegmentKind::table;
    if (line.substr(0, 2) == "![") image = true;
  }
  return image ? SegmentKind::image : SegmentKind::text;
}

}  // namespace

std::vector<Segment> parse_markdown(std::string_view markdown, std::string_view doc_title, Diagnostics* diagnostics) {
  std::vector<Segment> segments;
  const auto lines = text::split_lines(markdown);

  std::vector<std::string_view> body;
  bool in_preamble = true;
  Segment current;

  auto flush = [&] {
    std::string content;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) content.push_back('\n');
      content.append(body[i]);
    }
    body.clear();
    if (in_preamble) {
      if (text::trim(content).empty()) return;
      current.level = 0;
      current.title = std::string(doc_title);
    }
    current.kind = detect_kind(content);
    current.content = std::move(content);
    segments.push_back(std::move(current));
    current = Segment{};
  };

  for (const auto line : lines) {
    const HeadingParse h = parse_heading_line(line);
    if (!h.is_heading) {
      body.push_back(line);
      continue;
    }
    flush();
    in_preamble = false;
    if (h.malformed) {
      warn(diagnostics, std::string(doc_title) + ": malformed heading number in '" +
                            std::string(text::trim_right(line)) + "'");
    }
    current.heading = std::string(text::trim_right(line));
    current.chapter_number = h.chapter_number;
    current.level = h.level;
    current.title = h.title;
  }
  flush();

  // Chapter numbers double as segment ids unless malformed or repeated.
  std::vector<std::string> used;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto& seg = segments[i];
    std::string id;
    if (seg.level == 0 && seg.heading.empty()) {
      id = "0";
    } else if (!seg.chapter_number.empty() && dotted_components(seg.chapter_number)) {
      id = seg.chapter_number;
    }
    if (id.empty() || std::find(used.begin(), used.end(), id) != used.end()) id = "s" + std::to_string(i + 1);
    used.push_back(id);
    seg.segment_id = std::move(id);
  }
  return segments;
}

}  // namespace hiqa
