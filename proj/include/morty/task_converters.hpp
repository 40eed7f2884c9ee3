#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "morty/evaluator.hpp"
#include "morty/types.hpp"

// Deterministic converters that reframe the corpus as extractive QA and
// as BIO-tagged NER, plus the scorers for prediction files produced by
// external baselines.
namespace morty::task_converters {

struct AnswerSpan {
  std::string text;
  std::size_t char_start = 0;

  bool operator==(const AnswerSpan&) const = default;
};

// One question per (paper, property). Answers are all exact,
// case-sensitive occurrences of any gold value in the context; when no
// value occurs the item is unanswerable (gold values are often reworded
// or absent from the text, which is what makes extractive baselines a
// weak fit for this corpus).
struct QAItem {
  std::string paper_id;
  std::string property_label;
  std::string question;  // "what is the <property_label>?"
  std::string context;
  std::vector<AnswerSpan> answers;  // ascending char_start
  bool is_answerable = false;

  bool operator==(const QAItem&) const = default;
};

std::string question_for(const std::string& property_label);

std::vector<QAItem> to_qa_dataset(const std::vector<TrainingExample>& examples,
                                  const std::vector<AnnotationRecord>& records);

// Whitespace tokens with BIO tags "B-<property>", "I-<property>", "O".
struct NERDocument {
  std::string paper_id;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  bool operator==(const NERDocument&) const = default;
};

// Token-aligned exact value matches become entities of the property's
// class. Overlapping candidates resolve by longest match, then earliest
// start, then lexicographically smallest property label.
std::vector<NERDocument> to_ner_dataset(const std::vector<TrainingExample>& examples,
                                        const std::vector<AnnotationRecord>& records);

struct QAPrediction {
  std::string paper_id;
  std::string property_label;
  std::string answer_text;
};

// @1 scoring: only the first prediction listed for an item counts.
// Per-item token-overlap P/R/F1 against the best-matching gold span,
// macro-averaged. Unanswerable items score 1 for an empty prediction and
// 0 otherwise. A prediction for an unknown item is an error.
evaluator::ExtractionScores score_qa_at1(const std::vector<QAPrediction>& predictions,
                                         const std::vector<QAItem>& gold);

// Entity-level exact-boundary, exact-class micro P/R/F1 (CoNLL
// convention). Documents align by paper_id; token length mismatches are
// an error.
evaluator::ExtractionScores score_ner(const std::vector<NERDocument>& predicted,
                                      const std::vector<NERDocument>& gold);

// SQuAD-v2-compatible JSON (version/data/paragraphs/qas with
// is_impossible flags; a non-standard "property" field keeps items
// round-trippable).
void write_squad_json(const std::filesystem::path& path, const std::vector<QAItem>& items);
std::vector<QAItem> read_squad_json(const std::filesystem::path& path);

// CoNLL-style text: one "token<TAB>tag" per line, blank line between
// documents. The format carries no paper ids; readers assign doc-<index>.
void write_conll(const std::filesystem::path& path, const std::vector<NERDocument>& documents);
std::vector<NERDocument> read_conll(const std::filesystem::path& path);

// JSON Lines {"paper_id", "property_label", "answer_text"} — the
// prediction contract consumed by score_qa_at1.
void write_qa_predictions(const std::filesystem::path& path,
                          const std::vector<QAPrediction>& predictions);
std::vector<QAPrediction> read_qa_predictions(const std::filesystem::path& path);

}  // namespace morty::task_converters
