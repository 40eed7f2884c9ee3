#include "morty/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "morty/strings.hpp"

namespace morty::dataset_io {

namespace strings = morty::strings;
using nlohmann::json;

namespace {

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw format_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

// Streams a JSONL file, reporting parse failures as file:line.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strings::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw format_error(where + ": malformed JSON line: " + e.what());
    }
    try {
      fn(j, where);
    } catch (const json::exception& e) {
      throw format_error(where + ": missing or mistyped fields: " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path.string());
  return out;
}

json example_to_json(const TrainingExample& example) {
  return json{{"paper_id", example.paper_id},
              {"input_text", example.input_text},
              {"target_summary", example.target_summary},
              {"input_token_count", example.input_token_count}};
}

}  // namespace

ArticleText load_article_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  try {
    ArticleText article;
    article.paper_id = j.at("paper_id").get<std::string>();
    if (article.paper_id.empty()) {
      throw format_error("article " + path.string() + ": empty paper_id");
    }
    article.title = j.value("title", std::string{});
    article.extraction_tool = j.value("extraction_tool", std::string{});
    for (const auto& section : j.at("sections")) {
      Section s;
      s.label = section.at("label").get<std::string>();
      if (strings::trim(s.label).empty()) {
        throw format_error("article " + path.string() + ": section label is blank");
      }
      s.paragraphs = section.at("paragraphs").get<std::vector<std::string>>();
      article.sections.push_back(std::move(s));
    }
    if (j.contains("non_prose")) {
      for (const auto& node : j.at("non_prose")) {
        article.non_prose.push_back(NonProseNode{
            non_prose_kind_from_string(node.at("kind").get<std::string>()),
            node.at("content").get<std::string>()});
      }
    }
    return article;
  } catch (const json::exception& e) {
    throw format_error("article " + path.string() + " missing fields: " + e.what());
  }
}

std::vector<ArticleText> load_articles_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw io_error("article directory does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ArticleText> articles;
  std::unordered_set<std::string> seen;
  for (const auto& file : files) {
    ArticleText article = load_article_json(file);
    if (!seen.insert(article.paper_id).second) {
      throw format_error("duplicate paper_id '" + article.paper_id + "' in " + file.string());
    }
    articles.push_back(std::move(article));
  }
  return articles;
}

void write_dataset_jsonl(const std::filesystem::path& path,
                         const std::vector<TrainingExample>& examples) {
  auto out = open_out(path);
  for (const auto& example : examples) out << example_to_json(example).dump() << "\n";
}

std::vector<TrainingExample> read_dataset_jsonl(const std::filesystem::path& path) {
  std::vector<TrainingExample> examples;
  for_each_jsonl(path, [&](const json& j, const std::string&) {
    TrainingExample example;
    example.paper_id = j.at("paper_id").get<std::string>();
    example.input_text = j.at("input_text").get<std::string>();
    example.target_summary = j.at("target_summary").get<std::string>();
    example.input_token_count = j.at("input_token_count").get<std::size_t>();
    examples.push_back(std::move(example));
  });
  return examples;
}

void write_split_files(const DatasetSplit& split, const std::filesystem::path& prefix) {
  const std::string stem = prefix.string();
  write_dataset_jsonl(stem + ".train.jsonl", split.train);
  write_dataset_jsonl(stem + ".val.jsonl", split.validation);
  write_dataset_jsonl(stem + ".test.jsonl", split.test);

  const json manifest = {
      {"seed", split.seed},
      {"counts",
       {{"train", split.train.size()},
        {"validation", split.validation.size()},
        {"test", split.test.size()}}},
      {"total", split.train.size() + split.validation.size() + split.test.size()}};
  auto out = open_out(prefix.parent_path() / "split_manifest.json");
  out << manifest.dump(2) << "\n";
}

void write_predictions_jsonl(const std::filesystem::path& path,
                             const std::vector<Prediction>& predictions) {
  auto out = open_out(path);
  for (const auto& prediction : predictions) {
    out << json{{"paper_id", prediction.paper_id}, {"prediction", prediction.prediction}}.dump()
        << "\n";
  }
}

std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path) {
  std::vector<Prediction> predictions;
  for_each_jsonl(path, [&](const json& j, const std::string&) {
    predictions.push_back(
        Prediction{j.at("paper_id").get<std::string>(), j.at("prediction").get<std::string>()});
  });
  return predictions;
}

void write_parsed_jsonl(const std::filesystem::path& path,
                        const std::vector<ParsedSummaryRecord>& records) {
  auto out = open_out(path);
  for (const auto& record : records) {
    json pairs = json::array();
    for (const auto& pair : record.pairs) {
      pairs.push_back({{"property_label", pair.property_label}, {"values", pair.values}});
    }
    out << json{{"paper_id", record.paper_id},
                {"pairs", pairs},
                {"malformed_segments", record.malformed_segments},
                {"parse_complete", record.parse_complete}}
               .dump()
        << "\n";
  }
}

std::vector<ParsedSummaryRecord> read_parsed_jsonl(const std::filesystem::path& path) {
  std::vector<ParsedSummaryRecord> records;
  for_each_jsonl(path, [&](const json& j, const std::string&) {
    ParsedSummaryRecord record;
    record.paper_id = j.at("paper_id").get<std::string>();
    for (const auto& pair : j.at("pairs")) {
      record.pairs.push_back(PropertyValuePair{pair.at("property_label").get<std::string>(),
                                               pair.at("values").get<std::vector<std::string>>()});
    }
    record.malformed_segments = j.at("malformed_segments").get<std::vector<std::string>>();
    record.parse_complete = j.at("parse_complete").get<bool>();
    records.push_back(std::move(record));
  });
  return records;
}

void write_dataset_manifest(const std::filesystem::path& path, std::uint64_t seed,
                            const corpus_builder::PairingResult& pairing,
                            const corpus_builder::CorpusStats& stats) {
  json properties = json::object();
  for (const auto& [label, count] : stats.property_frequency) properties[label] = count;
  const json manifest = {{"seed", seed},
                         {"examples", pairing.examples.size()},
                         {"unmatched_paper_ids", pairing.unmatched_paper_ids},
                         {"stats",
                          {{"mean_tokens", stats.mean_tokens},
                           {"min_tokens", stats.min_tokens},
                           {"max_tokens", stats.max_tokens},
                           {"property_frequency", properties}}}};
  auto out = open_out(path);
  out << manifest.dump(2) << "\n";
}

}  // namespace morty::dataset_io
