#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace morty {

// Error taxonomy used across the pipeline. The CLI maps these onto
// sysexits-style exit codes.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed input data (bad JSONL line, broken CoNLL file, ...).
struct format_error : error {
  using error::error;
};
// Bad or missing configuration (paths, ratios, flag combinations).
struct config_error : error {
  using error::error;
};
struct io_error : error {
  using error::error;
};
// A requested backend or runtime is not usable in this environment.
struct capability_error : error {
  using error::error;
};

// One predefined property and the values curated for it.
struct PropertyValuePair {
  std::string property_label;
  std::vector<std::string> values;  // ordered, non-empty, no duplicates

  bool operator==(const PropertyValuePair&) const = default;
};

// Gold annotations for one paper.
struct AnnotationRecord {
  std::string paper_id;
  std::vector<PropertyValuePair> pairs;  // property labels unique

  bool operator==(const AnnotationRecord&) const = default;
};

struct Section {
  std::string label;
  std::vector<std::string> paragraphs;

  bool operator==(const Section&) const = default;
};

enum class NonProseKind { table, figure, footnote };

struct NonProseNode {
  NonProseKind kind;
  std::string content;

  bool operator==(const NonProseNode&) const = default;
};

// A paper's extracted full text: ordered labeled sections plus the
// non-prose nodes (tables, figures, footnotes) the extractor produced.
struct ArticleText {
  std::string paper_id;
  std::vector<Section> sections;
  std::vector<NonProseNode> non_prose;
  std::string title;
  std::string extraction_tool;

  bool operator==(const ArticleText&) const = default;
};

// One (cleaned input text, target summary) pair ready for a summarizer.
struct TrainingExample {
  std::string paper_id;
  std::string input_text;
  std::string target_summary;
  std::size_t input_token_count = 0;  // whitespace-delimited tokens of input_text

  bool operator==(const TrainingExample&) const = default;
};

struct DatasetSplit {
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> validation;
  std::vector<TrainingExample> test;
  std::uint64_t seed = 0;

  // Fixed 80-10-10 ratios; remainders after flooring go to test.
  static constexpr double kTrainRatio = 0.8;
  static constexpr double kValidationRatio = 0.1;
  static constexpr double kTestRatio = 0.1;
};

// A model (or baseline) prediction for one paper.
struct Prediction {
  std::string paper_id;
  std::string prediction;

  bool operator==(const Prediction&) const = default;
};

const char* to_string(NonProseKind kind);
NonProseKind non_prose_kind_from_string(const std::string& s);

}  // namespace morty
