#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "morty/types.hpp"

// ROUGE-1/2/L scoring, exact pair-level extraction scoring, and report
// generation (machine-readable JSON plus a Markdown expected-vs-predicted
// table).
namespace morty::evaluator {

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Score&) const = default;
};

// f1 is the harmonic mean, 0 when precision + recall == 0.
Score make_score(double precision, double recall);

struct RougeScores {
  Score rouge1;
  Score rouge2;
  Score rougeL;

  bool operator==(const RougeScores&) const = default;
};

// Clipped n-gram overlap on whitespace tokens: each n-gram matches
// min(candidate multiplicity, reference multiplicity) times. Zero
// denominators yield 0. Throws on n < 1. Case-sensitive: structured
// summaries are format-sensitive.
Score rouge_n(const std::string& candidate, const std::string& reference, int n);

// Token-level longest common subsequence: P = |LCS| / |candidate|,
// R = |LCS| / |reference|.
Score rouge_l(const std::string& candidate, const std::string& reference);

struct SummaryEvaluation {
  RougeScores aggregate;                  // macro mean over all gold examples
  std::size_t evaluated = 0;              // gold examples scored (includes missing)
  std::size_t missing_predictions = 0;    // gold examples scored as empty string

  bool operator==(const SummaryEvaluation&) const = default;
};

// Scores each prediction against its gold target summary and
// macro-averages. A gold example without a prediction scores as the
// empty string, so partial prediction files cannot inflate aggregates.
// A prediction whose paper_id has no gold example is an error.
SummaryEvaluation evaluate_summaries(const std::vector<Prediction>& predictions,
                                     const std::vector<TrainingExample>& gold);

struct PropertyScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold value (or item/entity) count

  bool operator==(const PropertyScore&) const = default;
};

struct ExtractionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, PropertyScore> per_property;  // keyed by gold property labels

  bool operator==(const ExtractionScores&) const = default;
};

struct ParsedPrediction {
  std::string paper_id;
  std::vector<PropertyValuePair> pairs;
};

// Micro P/R/F1 over individual values: a predicted (label, value) is a
// true positive iff the same normalized pair exists in gold. Predictions
// for papers without gold records are an error; gold papers without
// predictions count as pure misses.
ExtractionScores evaluate_extraction(const std::vector<ParsedPrediction>& predictions,
                                     const std::vector<AnnotationRecord>& gold);

struct ReportRow {
  std::string paper_id;
  std::string property;
  std::vector<std::string> expected;
  std::vector<std::string> predicted;

  bool operator==(const ReportRow&) const = default;
};

struct EvaluationReport {
  RougeScores rouge;
  std::size_t evaluated = 0;
  std::size_t missing_predictions = 0;
  ExtractionScores extraction;
  std::vector<ReportRow> rows;

  bool operator==(const EvaluationReport&) const = default;
};

// Full report for a prediction file against a gold dataset: ROUGE over
// raw strings, extraction scores over tolerantly parsed pairs (gold
// targets parse strictly), and one row per (paper, gold property) plus
// rows for predicted-only properties.
EvaluationReport build_report(const std::vector<Prediction>& predictions,
                              const std::vector<TrainingExample>& gold);

// Writes `json_path` and a sibling Markdown file with the same stem.
void render_report(const EvaluationReport& report, const std::filesystem::path& json_path);

EvaluationReport load_report(const std::filesystem::path& json_path);

}  // namespace morty::evaluator
