#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "emoarc/error.hpp"

namespace emoarc::predict {

struct WindowSpec {
  std::size_t context_size = 0;  // sentences on each side
  std::size_t max_tokens = 512;
  std::string separator = "[SEP]";

  bool operator==(const WindowSpec&) const = default;
};

struct ContextInput {
  std::size_t center_index = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t effective_context = 0;
  std::string rendered;
  std::size_t tokens = 0;
  bool overlong = false;  // the center sentence alone exceeds max_tokens
};

using TokenCounter = std::function<std::size_t(const std::string&)>;

/// Whitespace tokens times 1.3, rounded up: a stand-in for subword counts.
inline std::size_t subword_estimate(const std::string& text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return (words * 13 + 9) / 10;
}

/// Sentences lo..hi joined with " <separator> " (separators only between
/// sentences, so segment j is sentence lo + j).
inline std::string render_window(std::span<const std::string> sentences, std::size_t lo, std::size_t hi,
                                 const std::string& separator) {
  std::string out;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i > lo) out += " " + separator + " ";
    out += sentences[i];
  }
  return out;
}

/// One input per sentence. Each window starts at the configured context and
/// shrinks symmetrically until the rendered text fits max_tokens; a center
/// sentence that is too long on its own is kept whole and flagged.
inline std::vector<ContextInput> build_windows(std::span<const std::string> sentences, const WindowSpec& spec,
                                               const TokenCounter& count = subword_estimate) {
  if (spec.max_tokens == 0) throw ValidationError("window max_tokens must be positive");
  const std::size_t n = sentences.size();
  std::vector<ContextInput> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ContextInput w;
    w.center_index = i;
    for (std::size_t c = spec.context_size;; --c) {
      w.lo = i >= c ? i - c : 0;
      w.hi = std::min(n - 1, i + c);
      w.effective_context = c;
      w.rendered = render_window(sentences, w.lo, w.hi, spec.separator);
      w.tokens = count(w.rendered);
      if (w.tokens <= spec.max_tokens) break;
      if (c == 0) {
        w.overlong = true;
        break;
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace emoarc::predict
