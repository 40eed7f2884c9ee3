#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "morty/corpus_builder.hpp"
#include "morty/types.hpp"

// Readers and writers for the pipeline's file contracts. All JSONL
// writers emit one compact JSON object per line; all readers report
// malformed input as format_error with file:line.
namespace morty::dataset_io {

// {"paper_id", "title", "sections": [{"label", "paragraphs"}],
//  "non_prose": [{"kind", "content"}]}; "non_prose", "title" and
// "extraction_tool" are optional.
ArticleText load_article_json(const std::filesystem::path& path);

// Loads every *.json in the directory, sorted by filename. Duplicate
// paper ids are an error.
std::vector<ArticleText> load_articles_dir(const std::filesystem::path& dir);

// {"paper_id", "input_text", "target_summary", "input_token_count"}
void write_dataset_jsonl(const std::filesystem::path& path,
                         const std::vector<TrainingExample>& examples);
std::vector<TrainingExample> read_dataset_jsonl(const std::filesystem::path& path);

// Writes <prefix>.train.jsonl / <prefix>.val.jsonl / <prefix>.test.jsonl
// plus split_manifest.json (seed and counts) next to them.
void write_split_files(const DatasetSplit& split, const std::filesystem::path& prefix);

// {"paper_id", "prediction"}
void write_predictions_jsonl(const std::filesystem::path& path,
                             const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path);

struct ParsedSummaryRecord {
  std::string paper_id;
  std::vector<PropertyValuePair> pairs;
  std::vector<std::string> malformed_segments;
  bool parse_complete = true;
};

// Output of the `parse` stage, input of `link`:
// {"paper_id", "pairs": [{"property_label", "values"}],
//  "malformed_segments", "parse_complete"}
void write_parsed_jsonl(const std::filesystem::path& path,
                        const std::vector<ParsedSummaryRecord>& records);
std::vector<ParsedSummaryRecord> read_parsed_jsonl(const std::filesystem::path& path);

// build-dataset manifest: seed, counts, unmatched ids, corpus statistics.
void write_dataset_manifest(const std::filesystem::path& path, std::uint64_t seed,
                            const corpus_builder::PairingResult& pairing,
                            const corpus_builder::CorpusStats& stats);

}  // namespace morty::dataset_io
