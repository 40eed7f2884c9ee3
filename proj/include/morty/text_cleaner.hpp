#pragma once

#include <set>
#include <string>
#include <string_view>

#include "morty/types.hpp"

// Turns an extracted article into one flat cleaned string for the
// summarizer: drops configured sections and all non-prose nodes, strips
// URLs, citation markers and non-ASCII bytes, and collapses whitespace.
namespace morty::text_cleaner {

struct CleaningConfig {
  // Compared against normalize_section_label(section.label).
  std::set<std::string> removed_sections = default_removed_sections();
  bool strip_urls = true;
  bool ascii_only = true;
  bool strip_citations = true;

  static std::set<std::string> default_removed_sections() {
    return {"abstract",        "related work",     "background",
            "acknowledgments", "acknowledgements", "references"};
  }

  bool operator==(const CleaningConfig&) const = default;
};

// Lowercases, trims, collapses whitespace, and strips leading section
// numbering ("3.", "3.1", "IV.").
std::string normalize_section_label(std::string_view label);

// Removes bracketed numeric citations ([12], [3,5], [1-4]) and
// parenthesized citations containing a four-digit year ((Lee et al.,
// 2019)). Parentheticals without a year are left alone.
std::string strip_citation_markers(const std::string& text);

// Result never has leading/trailing whitespace or two consecutive
// spaces, and the function is idempotent on its own output. Returns ""
// when every section is removed; the caller decides whether that drops
// the paper.
std::string clean_article(const ArticleText& article, const CleaningConfig& config = {});

}  // namespace morty::text_cleaner
