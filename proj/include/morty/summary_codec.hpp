#pragma once

#include <string>
#include <vector>

#include "morty/types.hpp"

// The structured-summary text format and its tolerant parser.
//
// Grammar of a serialized summary (see also docs/summary_format.md):
//
//   summary  := record (" ; " record)*
//   record   := label " :: " value (" | " value)*
//
// The reserved sequences "::", "|" and ";" never occur inside a label or
// value: serialize() replaces each occurrence with "/" before emission.
// The parser accepts irregular spacing around the delimiters, splits each
// segment on the FIRST "::" (values may contain single colons), and in
// tolerant mode collects unparseable segments instead of raising.
namespace morty::summary_codec {

struct StructuredSummary {
  std::string raw;                             // verbatim input, kept for reporting
  std::vector<PropertyValuePair> pairs;        // normalized, labels unique
  std::vector<std::string> malformed_segments;
  bool parse_complete = true;                  // true iff malformed_segments empty

  bool operator==(const StructuredSummary&) const = default;
};

// Replaces the reserved sequences "::", "|", ";" with "/". Lossy on
// purpose; reserved sequences are vanishingly rare in curated labels
// and values.
std::string escape_reserved(const std::string& s);

// Canonical form used by every comparison in the pipeline: trims labels
// and values, collapses internal whitespace, drops entries that become
// empty, deduplicates values, and merges duplicate labels by value union
// (first-occurrence order throughout).
std::vector<PropertyValuePair> normalize_pairs(std::vector<PropertyValuePair> pairs);

std::string serialize_pairs(const std::vector<PropertyValuePair>& pairs);

// Serializes a record's pairs. Throws morty::error when pairs is empty.
// Deterministic: equal records yield equal strings.
std::string serialize(const AnnotationRecord& record);

// Parses any string into property-value pairs. tolerant=true never
// throws; tolerant=false throws morty::format_error naming the first
// malformed segment. Whitespace-only segments are skipped silently.
StructuredSummary parse(const std::string& text, bool tolerant = true);

}  // namespace morty::summary_codec
