#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small ASCII-oriented string helpers shared by the pipeline modules.
// Whitespace means the byte set { ' ', '\t', '\n', '\r', '\f', '\v' };
// multi-byte code points are never treated as whitespace.
namespace morty::strings {

bool is_space(char c);

std::string trim(std::string_view s);

// Trims and collapses every internal whitespace run to a single space.
std::string normalize_whitespace(std::string_view s);

// normalize_whitespace + ASCII case-folding; used wherever two labels or
// values must compare as "the same key" (catalog lookup, blocklists).
std::string normalize_key(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::size_t count_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// True iff the whole value has the form scheme "://" rest, with
// scheme = [a-zA-Z][a-zA-Z0-9+.-]*.
bool is_uri(std::string_view value);

// Removes every scheme://non-space-run substring. Leaves surrounding
// whitespace untouched; callers collapse afterwards.
std::string remove_urls(std::string_view text);

// Drops every byte outside 7-bit ASCII.
std::string remove_non_ascii(std::string_view text);

bool starts_with(std::string_view s, std::string_view prefix);

std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace morty::strings
