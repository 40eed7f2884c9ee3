#include "morty/task_converters.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "morty/strings.hpp"
#include "morty/summary_codec.hpp"

namespace morty::task_converters {

namespace strings = morty::strings;
using evaluator::ExtractionScores;
using evaluator::PropertyScore;
using nlohmann::json;

std::string question_for(const std::string& property_label) {
  return "what is the " + property_label + "?";
}

namespace {

// Records indexed by paper_id, pairs pre-normalized.
std::unordered_map<std::string, AnnotationRecord> normalized_records(
    const std::vector<AnnotationRecord>& records) {
  std::unordered_map<std::string, AnnotationRecord> by_id;
  for (const auto& record : records) {
    by_id.emplace(record.paper_id,
                  AnnotationRecord{record.paper_id, summary_codec::normalize_pairs(record.pairs)});
  }
  return by_id;
}

std::vector<std::size_t> find_all_occurrences(const std::string& haystack, const std::string& needle) {
  std::vector<std::size_t> starts;
  if (needle.empty()) return starts;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string::npos) {
    starts.push_back(pos);
    pos = haystack.find(needle, pos + 1);
  }
  return starts;
}

}  // namespace

std::vector<QAItem> to_qa_dataset(const std::vector<TrainingExample>& examples,
                                  const std::vector<AnnotationRecord>& records) {
  const auto by_id = normalized_records(records);

  std::vector<QAItem> items;
  for (const auto& example : examples) {
    auto it = by_id.find(example.paper_id);
    if (it == by_id.end()) continue;
    for (const auto& pair : it->second.pairs) {
      QAItem item;
      item.paper_id = example.paper_id;
      item.property_label = pair.property_label;
      item.question = question_for(pair.property_label);
      item.context = example.input_text;
      for (const auto& value : pair.values) {
        for (std::size_t start : find_all_occurrences(item.context, value)) {
          item.answers.push_back(AnswerSpan{value, start});
        }
      }
      std::sort(item.answers.begin(), item.answers.end(), [](const AnswerSpan& a, const AnswerSpan& b) {
        return std::tie(a.char_start, a.text) < std::tie(b.char_start, b.text);
      });
      item.is_answerable = !item.answers.empty();
      items.push_back(std::move(item));
    }
  }
  return items;
}

std::vector<NERDocument> to_ner_dataset(const std::vector<TrainingExample>& examples,
                                        const std::vector<AnnotationRecord>& records) {
  const auto by_id = normalized_records(records);

  std::vector<NERDocument> documents;
  for (const auto& example : examples) {
    auto it = by_id.find(example.paper_id);
    if (it == by_id.end()) continue;

    NERDocument doc;
    doc.paper_id = example.paper_id;
    doc.tokens = strings::split_whitespace(example.input_text);
    doc.tags.assign(doc.tokens.size(), "O");

    struct Candidate {
      std::size_t start;
      std::size_t length;
      std::string property_label;
    };
    std::vector<Candidate> candidates;
    for (const auto& pair : it->second.pairs) {
      for (const auto& value : pair.values) {
        const auto value_tokens = strings::split_whitespace(value);
        if (value_tokens.empty() || value_tokens.size() > doc.tokens.size()) continue;
        for (std::size_t start = 0; start + value_tokens.size() <= doc.tokens.size(); ++start) {
          if (std::equal(value_tokens.begin(), value_tokens.end(), doc.tokens.begin() + start)) {
            candidates.push_back(Candidate{start, value_tokens.size(), pair.property_label});
          }
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.length != b.length) return a.length > b.length;  // longest wins
      if (a.start != b.start) return a.start < b.start;      // then earliest
      return a.property_label < b.property_label;            // then smallest label
    });

    std::vector<bool> taken(doc.tokens.size(), false);
    for (const auto& candidate : candidates) {
      bool free = true;
      for (std::size_t i = candidate.start; i < candidate.start + candidate.length; ++i) {
        if (taken[i]) {
          free = false;
          break;
        }
      }
      if (!free) continue;
      for (std::size_t i = candidate.start; i < candidate.start + candidate.length; ++i) {
        taken[i] = true;
        doc.tags[i] = (i == candidate.start ? "B-" : "I-") + candidate.property_label;
      }
    }
    documents.push_back(std::move(doc));
  }
  return documents;
}

namespace {

evaluator::Score token_overlap(const std::vector<std::string>& predicted,
                               const std::vector<std::string>& gold) {
  std::unordered_map<std::string, std::size_t> gold_counts;
  for (const auto& token : gold) ++gold_counts[token];
  std::size_t overlap = 0;
  for (const auto& token : predicted) {
    auto it = gold_counts.find(token);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  const double p = predicted.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(predicted.size());
  const double r = gold.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(gold.size());
  return evaluator::make_score(p, r);
}

}  // namespace

ExtractionScores score_qa_at1(const std::vector<QAPrediction>& predictions,
                              const std::vector<QAItem>& gold) {
  std::set<std::pair<std::string, std::string>> known;
  for (const auto& item : gold) known.emplace(item.paper_id, item.property_label);

  // @1: keep only the first (top-ranked) prediction per item.
  std::map<std::pair<std::string, std::string>, std::string> top;
  for (const auto& pred : predictions) {
    const auto key = std::make_pair(pred.paper_id, pred.property_label);
    if (!known.contains(key)) {
      throw error("QA prediction for unknown item (" + pred.paper_id + ", " + pred.property_label + ")");
    }
    top.emplace(key, pred.answer_text);
  }

  struct Sums {
    double p = 0, r = 0, f1 = 0;
    std::size_t n = 0;
  };
  Sums overall;
  std::map<std::string, Sums> per_property;

  for (const auto& item : gold) {
    std::string answer;
    if (auto it = top.find({item.paper_id, item.property_label}); it != top.end()) answer = it->second;
    const auto pred_tokens = strings::split_whitespace(answer);

    evaluator::Score score;
    if (!item.is_answerable) {
      score = pred_tokens.empty() ? evaluator::make_score(1.0, 1.0) : evaluator::make_score(0.0, 0.0);
    } else {
      std::unordered_set<std::string> distinct_answers;
      for (const auto& span : item.answers) distinct_answers.insert(span.text);
      for (const auto& text : distinct_answers) {
        const auto s = token_overlap(pred_tokens, strings::split_whitespace(text));
        if (s.f1 > score.f1 || (s.f1 == score.f1 && s.recall > score.recall)) score = s;
      }
    }

    for (Sums* sums : {&overall, &per_property[item.property_label]}) {
      sums->p += score.precision;
      sums->r += score.recall;
      sums->f1 += score.f1;
      ++sums->n;
    }
  }

  const auto mean = [](const Sums& s) {
    const double n = s.n > 0 ? static_cast<double>(s.n) : 1.0;
    return std::tuple{s.p / n, s.r / n, s.f1 / n};
  };

  ExtractionScores scores;
  std::tie(scores.precision, scores.recall, scores.f1) = mean(overall);
  for (const auto& [label, sums] : per_property) {
    auto [p, r, f1] = mean(sums);
    scores.per_property[label] = PropertyScore{p, r, f1, sums.n};
  }
  return scores;
}

namespace {

struct Entity {
  std::size_t start;
  std::size_t end;  // exclusive
  std::string label;

  auto operator<=>(const Entity&) const = default;
};

// CoNLL-style span extraction; an I-tag that does not continue the
// current entity starts a new one (lenient, matching conlleval).
std::vector<Entity> bio_entities(const NERDocument& doc) {
  if (doc.tokens.size() != doc.tags.size()) {
    throw format_error("NER document '" + doc.paper_id + "': " + std::to_string(doc.tokens.size()) +
                       " tokens vs " + std::to_string(doc.tags.size()) + " tags");
  }
  std::vector<Entity> entities;
  std::size_t start = 0;
  std::string current;
  const auto flush = [&](std::size_t end) {
    if (!current.empty()) entities.push_back(Entity{start, end, current});
    current.clear();
  };
  for (std::size_t i = 0; i < doc.tags.size(); ++i) {
    const std::string& tag = doc.tags[i];
    if (tag == "O") {
      flush(i);
    } else if (strings::starts_with(tag, "B-")) {
      flush(i);
      current = tag.substr(2);
      start = i;
    } else if (strings::starts_with(tag, "I-")) {
      const std::string label = tag.substr(2);
      if (label != current) {
        flush(i);
        current = label;
        start = i;
      }
    } else {
      throw format_error("NER document '" + doc.paper_id + "': bad tag '" + tag + "'");
    }
  }
  flush(doc.tags.size());
  return entities;
}

}  // namespace

ExtractionScores score_ner(const std::vector<NERDocument>& predicted,
                           const std::vector<NERDocument>& gold) {
  std::unordered_map<std::string, const NERDocument*> pred_by_id;
  for (const auto& doc : predicted) pred_by_id.emplace(doc.paper_id, &doc);
  if (pred_by_id.size() != gold.size()) {
    throw format_error("NER scoring: " + std::to_string(pred_by_id.size()) + " predicted vs " +
                       std::to_string(gold.size()) + " gold documents");
  }

  struct Counts {
    std::size_t tp = 0, predicted = 0, gold = 0;
  };
  Counts micro;
  std::map<std::string, Counts> per_label;

  for (const auto& gold_doc : gold) {
    auto it = pred_by_id.find(gold_doc.paper_id);
    if (it == pred_by_id.end()) {
      throw format_error("NER scoring: no predicted document for '" + gold_doc.paper_id + "'");
    }
    const NERDocument& pred_doc = *it->second;
    if (pred_doc.tokens.size() != gold_doc.tokens.size()) {
      throw format_error("NER scoring: token length mismatch for '" + gold_doc.paper_id + "'");
    }
    const auto gold_entities = bio_entities(gold_doc);
    const auto pred_entities = bio_entities(pred_doc);
    const std::set<Entity> gold_set(gold_entities.begin(), gold_entities.end());

    for (const auto& entity : gold_entities) {
      ++micro.gold;
      ++per_label[entity.label].gold;
    }
    for (const auto& entity : pred_entities) {
      ++micro.predicted;
      ++per_label[entity.label].predicted;
      if (gold_set.contains(entity)) {
        ++micro.tp;
        ++per_label[entity.label].tp;
      }
    }
  }

  const auto to_score = [](const Counts& c) {
    const double p = c.predicted > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.predicted) : 0.0;
    const double r = c.gold > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.gold) : 0.0;
    return evaluator::make_score(p, r);
  };

  ExtractionScores scores;
  const auto s = to_score(micro);
  scores.precision = s.precision;
  scores.recall = s.recall;
  scores.f1 = s.f1;
  for (const auto& [label, counts] : per_label) {
    if (counts.gold == 0) continue;  // per-property rows only for gold classes
    const auto ls = to_score(counts);
    scores.per_property[label] = PropertyScore{ls.precision, ls.recall, ls.f1, counts.gold};
  }
  return scores;
}

void write_squad_json(const std::filesystem::path& path, const std::vector<QAItem>& items) {
  // One article per paper_id, one paragraph per context.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const QAItem*>> by_paper;
  for (const auto& item : items) {
    auto [it, inserted] = by_paper.try_emplace(item.paper_id);
    if (inserted) order.push_back(item.paper_id);
    it->second.push_back(&item);
  }

  json data = json::array();
  for (const auto& paper_id : order) {
    const auto& paper_items = by_paper[paper_id];
    json qas = json::array();
    for (const QAItem* item : paper_items) {
      json answers = json::array();
      for (const auto& span : item->answers) {
        answers.push_back({{"text", span.text}, {"answer_start", span.char_start}});
      }
      qas.push_back({{"id", item->paper_id + "::" + item->property_label},
                     {"property", item->property_label},
                     {"question", item->question},
                     {"answers", answers},
                     {"is_impossible", !item->is_answerable}});
    }
    const json paragraph = {{"context", paper_items.front()->context}, {"qas", qas}};
    data.push_back({{"title", paper_id}, {"paragraphs", json::array({paragraph})}});
  }

  std::ofstream out(path);
  if (!out) throw io_error("cannot write QA dataset: " + path.string());
  out << json{{"version", "v2.0"}, {"data", data}}.dump(2) << "\n";
}

std::vector<QAItem> read_squad_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open QA dataset: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error("malformed QA JSON " + path.string() + ": " + e.what());
  }

  std::vector<QAItem> items;
  try {
    for (const auto& article : j.at("data")) {
      const std::string paper_id = article.at("title").get<std::string>();
      for (const auto& paragraph : article.at("paragraphs")) {
        const std::string context = paragraph.at("context").get<std::string>();
        for (const auto& qa : paragraph.at("qas")) {
          QAItem item;
          item.paper_id = paper_id;
          item.context = context;
          item.question = qa.at("question").get<std::string>();
          if (qa.contains("property")) {
            item.property_label = qa.at("property").get<std::string>();
          } else {
            const std::string id = qa.at("id").get<std::string>();
            const auto sep = id.find("::");
            item.property_label = sep == std::string::npos ? id : id.substr(sep + 2);
          }
          for (const auto& answer : qa.at("answers")) {
            item.answers.push_back(AnswerSpan{answer.at("text").get<std::string>(),
                                              answer.at("answer_start").get<std::size_t>()});
          }
          item.is_answerable = !qa.at("is_impossible").get<bool>();
          items.push_back(std::move(item));
        }
      }
    }
  } catch (const json::exception& e) {
    throw format_error("QA JSON " + path.string() + " missing fields: " + e.what());
  }
  return items;
}

void write_conll(const std::filesystem::path& path, const std::vector<NERDocument>& documents) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write CoNLL file: " + path.string());
  bool first = true;
  for (const auto& doc : documents) {
    if (doc.tokens.size() != doc.tags.size()) {
      throw format_error("NER document '" + doc.paper_id + "': token/tag length mismatch");
    }
    if (!first) out << "\n";
    first = false;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      out << doc.tokens[i] << "\t" << doc.tags[i] << "\n";
    }
  }
}

std::vector<NERDocument> read_conll(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open CoNLL file: " + path.string());

  std::vector<NERDocument> documents;
  NERDocument current;
  std::size_t line_no = 0;
  const auto flush = [&]() {
    if (current.tokens.empty()) return;
    current.paper_id = "doc-" + std::to_string(documents.size());
    documents.push_back(std::move(current));
    current = NERDocument{};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw format_error(path.filename().string() + ":" + std::to_string(line_no) +
                         ": expected token<TAB>tag");
    }
    current.tokens.push_back(line.substr(0, tab));
    current.tags.push_back(line.substr(tab + 1));
  }
  flush();
  return documents;
}

void write_qa_predictions(const std::filesystem::path& path,
                          const std::vector<QAPrediction>& predictions) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write QA predictions: " + path.string());
  for (const auto& p : predictions) {
    const json row = {{"paper_id", p.paper_id},
                      {"property_label", p.property_label},
                      {"answer_text", p.answer_text}};
    out << row.dump() << "\n";
  }
}

std::vector<QAPrediction> read_qa_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open QA predictions: " + path.string());
  std::vector<QAPrediction> predictions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strings::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw format_error(where + ": invalid JSON: " + e.what());
    }
    try {
      predictions.push_back(QAPrediction{row.at("paper_id").get<std::string>(),
                                         row.at("property_label").get<std::string>(),
                                         row.at("answer_text").get<std::string>()});
    } catch (const json::exception& e) {
      throw format_error(where + ": missing field: " + e.what());
    }
  }
  return predictions;
}

}  // namespace morty::task_converters
