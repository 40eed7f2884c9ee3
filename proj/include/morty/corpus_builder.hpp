#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "morty/types.hpp"

// Builds the paired (article text, gold annotation) corpus from a
// knowledge-graph snapshot, and produces the deterministic 80-10-10
// train/validation/test split.
namespace morty::corpus_builder {

// Reads a snapshot file (JSON Lines, one {"paper_id", "property_label",
// "value"} statement per line) into one record per paper.
//
// Pairs are dropped when their label is blocklisted (compared after
// whitespace normalization and ASCII case-folding) or when every value
// is a URI. Duplicate properties merge by value union, values dedupe
// after whitespace normalization, and papers left without pairs are
// dropped. Throws format_error naming the line on malformed input and
// error when nothing survives.
std::vector<AnnotationRecord> load_kg_snapshot(const std::filesystem::path& path,
                                               const std::vector<std::string>& property_blocklist = {});

using CleanerFn = std::function<std::string(const ArticleText&)>;

struct PairingResult {
  std::vector<TrainingExample> examples;
  std::vector<std::string> unmatched_paper_ids;  // records that had no article text
};

// One TrainingExample per record with a matching article; target summaries
// come from summary_codec::serialize, inputs from the cleaner. Records
// without text are reported in unmatched_paper_ids, never silently dropped.
PairingResult pair_corpus(const std::vector<AnnotationRecord>& records,
                          const std::vector<ArticleText>& texts, const CleanerFn& cleaner);

// Deterministic shuffle (seeded Fisher-Yates, stable across platforms)
// followed by the fixed partition sizes |train| = floor(0.8 N),
// |validation| = floor(0.1 N), |test| = remainder. Throws on empty input.
DatasetSplit split_dataset(std::vector<TrainingExample> examples, std::uint64_t seed);

struct CorpusStats {
  std::size_t example_count = 0;
  double mean_tokens = 0.0;
  std::size_t min_tokens = 0;
  std::size_t max_tokens = 0;
  std::map<std::string, std::size_t> property_frequency;
};

// Informational only; an empty corpus yields all-zero statistics.
CorpusStats corpus_stats(const std::vector<TrainingExample>& examples);

}  // namespace morty::corpus_builder
