#include "morty/text_cleaner.hpp"

#include <regex>

#include "morty/strings.hpp"

namespace morty::text_cleaner {

namespace strings = morty::strings;

std::string normalize_section_label(std::string_view label) {
  std::string s = strings::normalize_key(label);
  // Leading numbering: arabic ("3", "3.", "3.1.2") or dotted roman ("iv.").
  static const std::regex numbering(R"(^(?:\d+(?:\.\d+)*\.?|[ivxlcdm]+\.)\s*)");
  std::smatch m;
  if (std::regex_search(s, m, numbering) && m.length(0) > 0) {
    s = strings::trim(s.substr(static_cast<std::size_t>(m.length(0))));
  }
  return s;
}

std::string strip_citation_markers(const std::string& text) {
  // [12], [3,5], [1-4]; ranges/lists with arbitrary spacing.
  static const std::regex bracket_citation(R"(\[\s*\d+(?:\s*[-,;]\s*\d+)*\s*\])");
  // Any non-nested parenthetical containing a plausible publication year.
  static const std::regex author_year_citation(
      R"(\([^()]*\b(?:1[5-9]\d\d|20\d\d)\b[^()]*\))");
  std::string out = std::regex_replace(text, bracket_citation, "");
  out = std::regex_replace(out, author_year_citation, "");
  return out;
}

std::string clean_article(const ArticleText& article, const CleaningConfig& config) {
  std::string text;
  for (const auto& section : article.sections) {
    if (config.removed_sections.contains(normalize_section_label(section.label))) continue;
    for (const auto& paragraph : section.paragraphs) {
      if (!text.empty()) text.push_back(' ');
      text.append(paragraph);
    }
  }
  // Non-prose nodes are never included.

  // ASCII filtering runs first so that markers "hidden" by stray
  // multi-byte characters still match the patterns below. The URL and
  // citation passes repeat until stable: removing one marker can expose
  // another (nested brackets, a parenthetical splitting a URL), and the
  // output must be a fixpoint for clean_article to be idempotent.
  if (config.ascii_only) text = strings::remove_non_ascii(text);
  for (;;) {
    std::string before = text;
    if (config.strip_urls) text = strings::remove_urls(text);
    if (config.strip_citations) text = strip_citation_markers(text);
    if (text == before) break;
  }
  return strings::normalize_whitespace(text);
}

}  // namespace morty::text_cleaner
