#include "morty/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "morty/strings.hpp"
#include "morty/summary_codec.hpp"

namespace morty::evaluator {

namespace strings = morty::strings;
using nlohmann::json;

Score make_score(double precision, double recall) {
  Score s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

namespace {

// n-gram multiset as a count map; tokens are glued with an unlikely
// separator byte so a flat string can key the map.
std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) key.push_back('\x1f');
      key.append(tokens[i + j]);
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

Score rouge_n(const std::string& candidate, const std::string& reference, int n) {
  if (n < 1) throw error("rouge_n: n must be >= 1");
  const auto sn = static_cast<std::size_t>(n);
  const auto cand_tokens = strings::split_whitespace(candidate);
  const auto ref_tokens = strings::split_whitespace(reference);

  const auto cand_counts = ngram_counts(cand_tokens, sn);
  const auto ref_counts = ngram_counts(ref_tokens, sn);

  std::size_t cand_total = cand_tokens.size() >= sn ? cand_tokens.size() - sn + 1 : 0;
  std::size_t ref_total = ref_tokens.size() >= sn ? ref_tokens.size() - sn + 1 : 0;

  std::size_t matches = 0;
  for (const auto& [gram, count] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) matches += std::min(count, it->second);
  }

  const double p = cand_total > 0 ? static_cast<double>(matches) / static_cast<double>(cand_total) : 0.0;
  const double r = ref_total > 0 ? static_cast<double>(matches) / static_cast<double>(ref_total) : 0.0;
  return make_score(p, r);
}

Score rouge_l(const std::string& candidate, const std::string& reference) {
  const auto cand = strings::split_whitespace(candidate);
  const auto ref = strings::split_whitespace(reference);
  if (cand.empty() || ref.empty()) return make_score(0.0, 0.0);

  // Classic LCS length table with two rolling rows.
  std::vector<std::size_t> prev(ref.size() + 1, 0);
  std::vector<std::size_t> curr(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      if (cand[i - 1] == ref[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  const auto lcs = static_cast<double>(prev[ref.size()]);
  return make_score(lcs / static_cast<double>(cand.size()), lcs / static_cast<double>(ref.size()));
}

SummaryEvaluation evaluate_summaries(const std::vector<Prediction>& predictions,
                                     const std::vector<TrainingExample>& gold) {
  std::unordered_map<std::string, const std::string*> by_id;
  std::unordered_set<std::string> gold_ids;
  for (const auto& example : gold) gold_ids.insert(example.paper_id);
  for (const auto& pred : predictions) {
    if (!gold_ids.contains(pred.paper_id)) {
      throw error("prediction for unknown paper_id '" + pred.paper_id + "'");
    }
    if (!by_id.emplace(pred.paper_id, &pred.prediction).second) {
      throw format_error("duplicate prediction for paper_id '" + pred.paper_id + "'");
    }
  }

  SummaryEvaluation eval;
  Score sum1, sum2, sumL;
  for (const auto& example : gold) {
    auto it = by_id.find(example.paper_id);
    std::string prediction;
    if (it == by_id.end()) {
      ++eval.missing_predictions;
    } else {
      prediction = *it->second;
    }
    for (auto [sum, score] : {std::pair{&sum1, rouge_n(prediction, example.target_summary, 1)},
                              std::pair{&sum2, rouge_n(prediction, example.target_summary, 2)},
                              std::pair{&sumL, rouge_l(prediction, example.target_summary)}}) {
      sum->precision += score.precision;
      sum->recall += score.recall;
      sum->f1 += score.f1;
    }
    ++eval.evaluated;
  }

  const auto mean = [&](const Score& sum) {
    const double n = static_cast<double>(eval.evaluated);
    return Score{sum.precision / n, sum.recall / n, sum.f1 / n};
  };
  if (eval.evaluated > 0) {
    eval.aggregate.rouge1 = mean(sum1);
    eval.aggregate.rouge2 = mean(sum2);
    eval.aggregate.rougeL = mean(sumL);
  }
  return eval;
}

ExtractionScores evaluate_extraction(const std::vector<ParsedPrediction>& predictions,
                                     const std::vector<AnnotationRecord>& gold) {
  struct Counts {
    std::size_t tp = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
  };

  std::unordered_map<std::string, const AnnotationRecord*> gold_by_id;
  for (const auto& record : gold) gold_by_id.emplace(record.paper_id, &record);

  // (paper, label, value) gold lookup; everything compares normalized.
  std::set<std::tuple<std::string, std::string, std::string>> gold_values;
  Counts micro;
  std::map<std::string, Counts> per_label;
  for (const auto& record : gold) {
    for (const auto& pair : summary_codec::normalize_pairs(record.pairs)) {
      for (const auto& value : pair.values) {
        gold_values.emplace(record.paper_id, pair.property_label, value);
        ++micro.gold;
        ++per_label[pair.property_label].gold;
      }
    }
  }

  for (const auto& prediction : predictions) {
    if (!gold_by_id.contains(prediction.paper_id)) {
      throw error("prediction for unknown paper_id '" + prediction.paper_id + "'");
    }
    for (const auto& pair : summary_codec::normalize_pairs(prediction.pairs)) {
      for (const auto& value : pair.values) {
        ++micro.predicted;
        const bool hit = gold_values.contains({prediction.paper_id, pair.property_label, value});
        if (hit) ++micro.tp;
        auto it = per_label.find(pair.property_label);
        if (it != per_label.end()) {
          ++it->second.predicted;
          if (hit) ++it->second.tp;
        }
        // Predicted-only properties still count in the micro totals above.
      }
    }
  }

  const auto to_score = [](const Counts& c) {
    const double p = c.predicted > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.predicted) : 0.0;
    const double r = c.gold > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.gold) : 0.0;
    return make_score(p, r);
  };

  ExtractionScores scores;
  const Score s = to_score(micro);
  scores.precision = s.precision;
  scores.recall = s.recall;
  scores.f1 = s.f1;
  for (const auto& [label, counts] : per_label) {
    const Score ls = to_score(counts);
    scores.per_property[label] = PropertyScore{ls.precision, ls.recall, ls.f1, counts.gold};
  }
  return scores;
}

EvaluationReport build_report(const std::vector<Prediction>& predictions,
                              const std::vector<TrainingExample>& gold) {
  EvaluationReport report;
  const SummaryEvaluation summary_eval = evaluate_summaries(predictions, gold);
  report.rouge = summary_eval.aggregate;
  report.evaluated = summary_eval.evaluated;
  report.missing_predictions = summary_eval.missing_predictions;

  std::unordered_map<std::string, const std::string*> pred_by_id;
  for (const auto& pred : predictions) pred_by_id.emplace(pred.paper_id, &pred.prediction);

  // Gold targets parse strictly: a gold parse failure is a pipeline bug.
  std::vector<AnnotationRecord> gold_records;
  std::vector<ParsedPrediction> parsed;
  for (const auto& example : gold) {
    gold_records.push_back(
        AnnotationRecord{example.paper_id, summary_codec::parse(example.target_summary, false).pairs});
    auto it = pred_by_id.find(example.paper_id);
    if (it != pred_by_id.end()) {
      parsed.push_back(ParsedPrediction{example.paper_id, summary_codec::parse(*it->second, true).pairs});
    }
  }
  report.extraction = evaluate_extraction(parsed, gold_records);

  std::unordered_map<std::string, const ParsedPrediction*> parsed_by_id;
  for (const auto& p : parsed) parsed_by_id.emplace(p.paper_id, &p);

  for (const auto& record : gold_records) {
    const ParsedPrediction* prediction = nullptr;
    if (auto it = parsed_by_id.find(record.paper_id); it != parsed_by_id.end()) prediction = it->second;

    const auto predicted_values = [&](const std::string& label) -> std::vector<std::string> {
      if (prediction == nullptr) return {};
      for (const auto& pair : prediction->pairs) {
        if (pair.property_label == label) return pair.values;
      }
      return {};
    };

    std::unordered_set<std::string> gold_labels;
    for (const auto& pair : record.pairs) {
      gold_labels.insert(pair.property_label);
      report.rows.push_back(
          ReportRow{record.paper_id, pair.property_label, pair.values, predicted_values(pair.property_label)});
    }
    if (prediction != nullptr) {
      for (const auto& pair : prediction->pairs) {
        if (!gold_labels.contains(pair.property_label)) {
          report.rows.push_back(ReportRow{record.paper_id, pair.property_label, {}, pair.values});
        }
      }
    }
  }
  return report;
}

namespace {

json score_to_json(const Score& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

Score score_from_json(const json& j) {
  Score s;
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.f1 = j.at("f1").get<double>();
  return s;
}

// A Markdown table cell: pipes would break the row.
std::string md_cell(const std::string& s) {
  return strings::replace_all(s, "|", "\\|");
}

std::string md_values(const std::vector<std::string>& values) {
  std::string joined = strings::join(values, "; ");
  return md_cell(joined.empty() ? "-" : joined);
}

}  // namespace

void render_report(const EvaluationReport& report, const std::filesystem::path& json_path) {
  json j;
  j["rouge"] = {{"rouge1", score_to_json(report.rouge.rouge1)},
                {"rouge2", score_to_json(report.rouge.rouge2)},
                {"rougeL", score_to_json(report.rouge.rougeL)},
                {"evaluated", report.evaluated},
                {"missing_predictions", report.missing_predictions}};
  json per_property = json::object();
  for (const auto& [label, s] : report.extraction.per_property) {
    per_property[label] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  j["extraction"] = {{"precision", report.extraction.precision},
                     {"recall", report.extraction.recall},
                     {"f1", report.extraction.f1},
                     {"per_property", per_property}};
  j["rows"] = json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"paper_id", row.paper_id},
                         {"property", row.property},
                         {"expected", row.expected},
                         {"predicted", row.predicted}});
  }

  {
    std::ofstream out(json_path);
    if (!out) throw io_error("cannot write report: " + json_path.string());
    out << j.dump(2) << "\n";
  }

  std::filesystem::path md_path = json_path;
  md_path.replace_extension(".md");
  std::ofstream md(md_path);
  if (!md) throw io_error("cannot write report: " + md_path.string());

  md << "# Evaluation report\n\n";
  md << "## Summary scores (ROUGE, macro-averaged over " << report.evaluated << " examples)\n\n";
  if (report.missing_predictions > 0) {
    md << "Missing predictions scored as empty: " << report.missing_predictions << "\n\n";
  }
  md << "| Metric | Precision | Recall | F1 |\n|---|---|---|---|\n";
  const auto rouge_row = [&](const char* name, const Score& s) {
    md << "| " << name << " | " << s.precision << " | " << s.recall << " | " << s.f1 << " |\n";
  };
  rouge_row("ROUGE-1", report.rouge.rouge1);
  rouge_row("ROUGE-2", report.rouge.rouge2);
  rouge_row("ROUGE-L", report.rouge.rougeL);

  md << "\n## Extraction scores (exact pair match)\n\n";
  md << "| Property | Precision | Recall | F1 | Support |\n|---|---|---|---|---|\n";
  md << "| (micro) | " << report.extraction.precision << " | " << report.extraction.recall << " | "
     << report.extraction.f1 << " | - |\n";
  for (const auto& [label, s] : report.extraction.per_property) {
    md << "| " << md_cell(label) << " | " << s.precision << " | " << s.recall << " | " << s.f1
       << " | " << s.support << " |\n";
  }

  md << "\n## Expected vs. predicted\n\n";
  md << "| Paper | Property | Expected | Predicted |\n|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    md << "| " << md_cell(row.paper_id) << " | " << md_cell(row.property) << " | "
       << md_values(row.expected) << " | " << md_values(row.predicted) << " |\n";
  }
}

EvaluationReport load_report(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw io_error("cannot open report: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error("malformed report JSON " + json_path.string() + ": " + e.what());
  }

  try {
    EvaluationReport report;
    const json& rouge = j.at("rouge");
    report.rouge.rouge1 = score_from_json(rouge.at("rouge1"));
    report.rouge.rouge2 = score_from_json(rouge.at("rouge2"));
    report.rouge.rougeL = score_from_json(rouge.at("rougeL"));
    report.evaluated = rouge.at("evaluated").get<std::size_t>();
    report.missing_predictions = rouge.at("missing_predictions").get<std::size_t>();

    const json& extraction = j.at("extraction");
    report.extraction.precision = extraction.at("precision").get<double>();
    report.extraction.recall = extraction.at("recall").get<double>();
    report.extraction.f1 = extraction.at("f1").get<double>();
    for (const auto& [label, s] : extraction.at("per_property").items()) {
      report.extraction.per_property[label] =
          PropertyScore{s.at("precision").get<double>(), s.at("recall").get<double>(),
                        s.at("f1").get<double>(), s.at("support").get<std::size_t>()};
    }
    for (const auto& row : j.at("rows")) {
      report.rows.push_back(ReportRow{row.at("paper_id").get<std::string>(),
                                      row.at("property").get<std::string>(),
                                      row.at("expected").get<std::vector<std::string>>(),
                                      row.at("predicted").get<std::vector<std::string>>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw format_error("report JSON " + json_path.string() + " missing fields: " + e.what());
  }
}

}  // namespace morty::evaluator
