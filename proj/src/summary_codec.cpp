#include "morty/summary_codec.hpp"

#include <cstddef>
#include <unordered_map>
#include <unordered_set>

#include "morty/strings.hpp"

namespace morty::summary_codec {

namespace strings = morty::strings;

std::string escape_reserved(const std::string& s) {
  std::string out = strings::replace_all(s, "::", "/");
  out = strings::replace_all(out, "|", "/");
  out = strings::replace_all(out, ";", "/");
  return out;
}

std::vector<PropertyValuePair> normalize_pairs(std::vector<PropertyValuePair> pairs) {
  std::vector<PropertyValuePair> out;
  std::unordered_map<std::string, std::size_t> label_index;
  for (auto& pair : pairs) {
    std::string label = strings::normalize_whitespace(pair.property_label);
    if (label.empty()) continue;
    auto [it, inserted] = label_index.try_emplace(label, out.size());
    if (inserted) out.push_back(PropertyValuePair{label, {}});
    auto& values = out[it->second].values;
    for (auto& value : pair.values) {
      std::string v = strings::normalize_whitespace(value);
      if (v.empty()) continue;
      bool seen = false;
      for (const auto& existing : values) {
        if (existing == v) {
          seen = true;
          break;
        }
      }
      if (!seen) values.push_back(std::move(v));
    }
  }
  std::erase_if(out, [](const PropertyValuePair& p) { return p.values.empty(); });
  return out;
}

std::string serialize_pairs(const std::vector<PropertyValuePair>& pairs) {
  std::string out;
  bool first_pair = true;
  for (const auto& pair : pairs) {
    if (!first_pair) out += " ; ";
    first_pair = false;
    out += escape_reserved(pair.property_label);
    out += " :: ";
    bool first_value = true;
    for (const auto& value : pair.values) {
      if (!first_value) out += " | ";
      first_value = false;
      out += escape_reserved(value);
    }
  }
  return out;
}

std::string serialize(const AnnotationRecord& record) {
  if (record.pairs.empty()) {
    throw error("cannot serialize record '" + record.paper_id + "': no property-value pairs");
  }
  return serialize_pairs(record.pairs);
}

namespace {

std::vector<std::string> split_on_char(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

}  // namespace

StructuredSummary parse(const std::string& text, bool tolerant) {
  StructuredSummary summary;
  summary.raw = text;

  std::vector<PropertyValuePair> collected;
  for (const std::string& segment : split_on_char(text, ';')) {
    if (strings::trim(segment).empty()) continue;

    std::size_t sep = segment.find("::");
    bool malformed = sep == std::string::npos;
    std::string label;
    std::vector<std::string> values;
    if (!malformed) {
      label = strings::normalize_whitespace(segment.substr(0, sep));
      for (const std::string& raw_value : split_on_char(segment.substr(sep + 2), '|')) {
        std::string value = strings::normalize_whitespace(raw_value);
        if (!value.empty()) values.push_back(std::move(value));
      }
      malformed = label.empty() || values.empty();
    }

    if (malformed) {
      std::string shown = strings::normalize_whitespace(segment);
      if (!tolerant) throw format_error("malformed summary segment: '" + shown + "'");
      summary.malformed_segments.push_back(shown);
      continue;
    }
    collected.push_back(PropertyValuePair{std::move(label), std::move(values)});
  }

  summary.pairs = normalize_pairs(std::move(collected));
  summary.parse_complete = summary.malformed_segments.empty();
  return summary;
}

}  // namespace morty::summary_codec
