#include "morty/corpus_builder.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "morty/strings.hpp"
#include "morty/summary_codec.hpp"

namespace morty::corpus_builder {

namespace strings = morty::strings;
using nlohmann::json;

std::vector<AnnotationRecord> load_kg_snapshot(const std::filesystem::path& path,
                                               const std::vector<std::string>& property_blocklist) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open snapshot file: " + path.string());

  std::unordered_set<std::string> blocked;
  for (const auto& label : property_blocklist) blocked.insert(strings::normalize_key(label));

  std::vector<AnnotationRecord> records;
  std::unordered_map<std::string, std::size_t> record_index;
  // per record: normalized label -> pair index
  std::vector<std::unordered_map<std::string, std::size_t>> pair_index;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strings::trim(line).empty()) continue;

    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    json statement;
    try {
      statement = json::parse(line);
    } catch (const json::exception& e) {
      throw format_error(where + ": malformed snapshot line: " + e.what());
    }
    if (!statement.is_object() || !statement.contains("paper_id") ||
        !statement.contains("property_label") || !statement.contains("value") ||
        !statement["paper_id"].is_string() || !statement["property_label"].is_string() ||
        !statement["value"].is_string()) {
      throw format_error(where +
                         ": snapshot statement needs string fields "
                         "paper_id, property_label, value");
    }

    const std::string paper_id = statement["paper_id"].get<std::string>();
    const std::string label = strings::normalize_whitespace(statement["property_label"].get<std::string>());
    const std::string value = strings::normalize_whitespace(statement["value"].get<std::string>());
    if (paper_id.empty()) throw format_error(where + ": empty paper_id");
    if (label.empty()) throw format_error(where + ": empty property_label");
    if (value.empty()) throw format_error(where + ": empty value");

    if (blocked.contains(strings::normalize_key(label))) continue;

    auto [rec_it, rec_inserted] = record_index.try_emplace(paper_id, records.size());
    if (rec_inserted) {
      records.push_back(AnnotationRecord{paper_id, {}});
      pair_index.emplace_back();
    }
    auto& record = records[rec_it->second];
    auto& labels = pair_index[rec_it->second];

    auto [pair_it, pair_inserted] = labels.try_emplace(label, record.pairs.size());
    if (pair_inserted) record.pairs.push_back(PropertyValuePair{label, {}});
    auto& values = record.pairs[pair_it->second].values;
    if (std::find(values.begin(), values.end(), value) == values.end()) values.push_back(value);
  }

  // URI-only pairs are structural noise; drop them, then drop papers left
  // without any pair.
  for (auto& record : records) {
    std::erase_if(record.pairs, [](const PropertyValuePair& pair) {
      return std::all_of(pair.values.begin(), pair.values.end(),
                         [](const std::string& v) { return strings::is_uri(v); });
    });
  }
  std::erase_if(records, [](const AnnotationRecord& r) { return r.pairs.empty(); });

  if (records.empty()) {
    throw error("empty corpus: no annotation records survived filtering in " + path.string());
  }
  return records;
}

PairingResult pair_corpus(const std::vector<AnnotationRecord>& records,
                          const std::vector<ArticleText>& texts, const CleanerFn& cleaner) {
  std::unordered_map<std::string, const ArticleText*> by_id;
  for (const auto& text : texts) by_id.emplace(text.paper_id, &text);

  PairingResult result;
  for (const auto& record : records) {
    auto it = by_id.find(record.paper_id);
    if (it == by_id.end()) {
      result.unmatched_paper_ids.push_back(record.paper_id);
      continue;
    }
    TrainingExample example;
    example.paper_id = record.paper_id;
    example.input_text = cleaner(*it->second);
    example.target_summary = summary_codec::serialize(record);
    example.input_token_count = strings::count_tokens(example.input_text);
    result.examples.push_back(std::move(example));
  }
  return result;
}

DatasetSplit split_dataset(std::vector<TrainingExample> examples, std::uint64_t seed) {
  if (examples.empty()) throw error("split_dataset: no examples to split");

  // Hand-rolled Fisher-Yates: std::shuffle and the distribution adapters
  // are implementation-defined, which would break cross-platform
  // reproducibility of the split membership.
  std::mt19937_64 rng(seed);
  for (std::size_t i = examples.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(examples[i], examples[j]);
  }

  const std::size_t n = examples.size();
  const std::size_t n_train = (8 * n) / 10;  // floor(0.8 N)
  const std::size_t n_val = n / 10;          // floor(0.1 N)

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(examples.begin(), examples.begin() + n_train);
  split.validation.assign(examples.begin() + n_train, examples.begin() + n_train + n_val);
  split.test.assign(examples.begin() + n_train + n_val, examples.end());
  return split;
}

CorpusStats corpus_stats(const std::vector<TrainingExample>& examples) {
  CorpusStats stats;
  if (examples.empty()) return stats;

  stats.example_count = examples.size();
  stats.min_tokens = examples.front().input_token_count;
  stats.max_tokens = examples.front().input_token_count;
  std::size_t total = 0;
  for (const auto& example : examples) {
    total += example.input_token_count;
    stats.min_tokens = std::min(stats.min_tokens, example.input_token_count);
    stats.max_tokens = std::max(stats.max_tokens, example.input_token_count);
    for (const auto& pair : summary_codec::parse(example.target_summary, /*tolerant=*/true).pairs) {
      ++stats.property_frequency[pair.property_label];
    }
  }
  stats.mean_tokens = static_cast<double>(total) / static_cast<double>(examples.size());
  return stats;
}

}  // namespace morty::corpus_builder
