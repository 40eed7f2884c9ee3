// Acceptance checks for the extraction pipeline. Each criterion prints
// one "PASS: <name>" or "FAIL: <name>: <detail>" line; the process exits
// non-zero when any criterion fails. Run via ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "morty/corpus_builder.hpp"
#include "morty/dataset_io.hpp"
#include "morty/evaluator.hpp"
#include "morty/kg_linker.hpp"
#include "morty/strings.hpp"
#include "morty/summary_codec.hpp"
#include "morty/task_converters.hpp"
#include "morty/text_cleaner.hpp"
#include "morty/types.hpp"
#include "rouge_oracle.hpp"
#include "test_util.hpp"

using namespace morty;
using nlohmann::json;
using testutil::TempDir;

namespace {

struct failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& detail) {
  if (!condition) throw failure(detail);
}

int g_failures = 0;

void criterion(const std::string& name, double time_budget_seconds,
               const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_budget_seconds > 0 && elapsed > time_budget_seconds) {
      ++g_failures;
      std::cout << "FAIL: " << name << ": exceeded time budget (" << elapsed << "s > "
                << time_budget_seconds << "s)\n";
      return;
    }
    std::cout << "PASS: " << name << "\n";
  } catch (const std::exception& e) {
    ++g_failures;
    std::cout << "FAIL: " << name << ": " << e.what() << "\n";
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

// ---- randomized inputs -------------------------------------------------

rouge_oracle::Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  rouge_oracle::Tokens tokens;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) tokens.push_back("t" + std::to_string(rng() % 10));
  return tokens;
}

// Printable ASCII including the reserved delimiter characters.
std::string random_piece(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 :|;/.,-";
  const std::size_t len = 1 + rng() % 12;
  std::string piece;
  for (std::size_t i = 0; i < len; ++i) piece.push_back(alphabet[rng() % alphabet.size()]);
  return piece;
}

// A random record that survives normalization (labels and values stay
// non-empty after escaping and whitespace collapse).
AnnotationRecord random_record(std::mt19937_64& rng, int index) {
  AnnotationRecord record;
  record.paper_id = "P" + std::to_string(index);
  const std::size_t n_pairs = 1 + rng() % 4;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    PropertyValuePair pair;
    while (pair.property_label.empty()) {
      pair.property_label =
          strings::normalize_whitespace(summary_codec::escape_reserved(random_piece(rng)));
    }
    const std::size_t n_values = 1 + rng() % 3;
    for (std::size_t v = 0; v < n_values; ++v) {
      std::string value;
      while (value.empty()) {
        value = strings::normalize_whitespace(summary_codec::escape_reserved(random_piece(rng)));
      }
      pair.values.push_back(value);
    }
    record.pairs.push_back(pair);
  }
  record.pairs = summary_codec::normalize_pairs(record.pairs);
  return record;
}

std::string random_noise(std::mt19937_64& rng) {
  const std::size_t len = rng() % 60;
  std::string noise;
  for (std::size_t i = 0; i < len; ++i) {
    noise.push_back(static_cast<char>(1 + rng() % 255));
  }
  return noise;
}

// ---- criteria ----------------------------------------------------------

void check_rouge_oracle_equivalence() {
  std::mt19937_64 rng(20240819);
  for (int i = 0; i < 1000; ++i) {
    const auto cand = random_tokens(rng, 20);
    const auto ref = random_tokens(rng, 20);
    const std::string cand_text = strings::join(cand, " ");
    const std::string ref_text = strings::join(ref, " ");

    const auto close = [&](const evaluator::Score& got, const evaluator::Score& want,
                           const char* metric) {
      require(std::fabs(got.precision - want.precision) < 1e-9 &&
                  std::fabs(got.recall - want.recall) < 1e-9 &&
                  std::fabs(got.f1 - want.f1) < 1e-9,
              std::string(metric) + " diverges from the brute-force oracle on pair " +
                  std::to_string(i) + " ('" + cand_text + "' vs '" + ref_text + "')");
    };
    close(evaluator::rouge_n(cand_text, ref_text, 1), rouge_oracle::rouge_n(cand, ref, 1), "rouge-1");
    close(evaluator::rouge_n(cand_text, ref_text, 2), rouge_oracle::rouge_n(cand, ref, 2), "rouge-2");
    close(evaluator::rouge_l(cand_text, ref_text), rouge_oracle::rouge_l(cand, ref), "rouge-l");
  }
}

void check_rouge_hand_fixtures() {
  const auto r1 = evaluator::rouge_n("the cat sat", "the cat ran", 1);
  const auto r2 = evaluator::rouge_n("the cat sat", "the cat ran", 2);
  const auto rl = evaluator::rouge_l("the cat sat", "the cat ran");
  require(std::fabs(r1.f1 - 2.0 / 3.0) < 1e-12, "rouge-1 F1 = " + fmt(r1.f1) + ", want 2/3");
  require(std::fabs(r2.f1 - 0.5) < 1e-12, "rouge-2 F1 = " + fmt(r2.f1) + ", want 1/2");
  require(std::fabs(rl.f1 - 2.0 / 3.0) < 1e-12, "rouge-l F1 = " + fmt(rl.f1) + ", want 2/3");
}

void check_codec_round_trip() {
  std::mt19937_64 rng(7777);
  for (int i = 0; i < 1000; ++i) {
    const AnnotationRecord record = random_record(rng, i);
    const std::string serialized = summary_codec::serialize(record);
    const auto parsed = summary_codec::parse(serialized);
    require(parsed.parse_complete,
            "serialized record " + std::to_string(i) + " did not parse cleanly: " + serialized);
    require(parsed.pairs == record.pairs,
            "round-trip mismatch on record " + std::to_string(i) + ": " + serialized);
  }
  for (int i = 0; i < 1000; ++i) {
    const std::string noise = random_noise(rng);
    const auto parsed = summary_codec::parse(noise);  // must not throw
    for (const auto& pair : parsed.pairs) {
      require(!pair.property_label.empty() && !pair.values.empty(),
              "tolerant parse produced an empty label or value set on noise input " +
                  std::to_string(i));
    }
  }
}

void check_cleaner_invariants() {
  std::mt19937_64 rng(31337);
  const std::vector<std::string> words = {"alpha", "beta",  "gamma",  "delta", "method",
                                          "study", "model", "corpus", "token", "result"};
  const std::vector<std::string> planted = {
      "https://leak.example.org/path",
      "http://leak.example.org",
      "[12]",
      "[3,5]",
      "[1-4]",
      "(Lee et al., 2019)",
      "caf\xC3\xA9",
      "na\xC3\xAFve",
  };

  for (int doc = 0; doc < 50; ++doc) {
    std::vector<std::string> paragraphs;
    const std::size_t n_paragraphs = 1 + rng() % 3;
    for (std::size_t p = 0; p < n_paragraphs; ++p) {
      std::vector<std::string> pieces;
      const std::size_t n_pieces = 4 + rng() % 10;
      for (std::size_t k = 0; k < n_pieces; ++k) {
        if (rng() % 3 == 0) {
          pieces.push_back(planted[rng() % planted.size()]);
        } else {
          pieces.push_back(words[rng() % words.size()]);
        }
      }
      paragraphs.push_back(strings::join(pieces, " "));
    }

    ArticleText article;
    article.paper_id = "D" + std::to_string(doc);
    article.sections.push_back(Section{"1. Method", paragraphs});
    article.sections.push_back(Section{"References", {"REMOVED-SENTINEL https://leak.example.org"}});
    article.non_prose.push_back(NonProseNode{NonProseKind::table, "TABLE-SENTINEL | cells"});

    const std::string cleaned = text_cleaner::clean_article(article);
    const std::string where = " survived in document " + std::to_string(doc) + ": '" + cleaned + "'";
    require(cleaned.find("leak.example.org") == std::string::npos, "a planted URL" + where);
    require(cleaned.find("http") == std::string::npos, "a URL scheme" + where);
    require(cleaned.find("[12]") == std::string::npos && cleaned.find("[3,5]") == std::string::npos &&
                cleaned.find("[1-4]") == std::string::npos,
            "a bracketed citation" + where);
    require(cleaned.find("2019") == std::string::npos, "a parenthetical citation" + where);
    require(cleaned.find("REMOVED-SENTINEL") == std::string::npos, "a removed section" + where);
    require(cleaned.find("TABLE-SENTINEL") == std::string::npos, "a non-prose node" + where);
    for (char c : cleaned) {
      require(static_cast<unsigned char>(c) < 128, "a non-ASCII byte" + where);
    }

    ArticleText recleaned;
    recleaned.paper_id = article.paper_id;
    recleaned.sections.push_back(Section{"Method", {cleaned}});
    require(text_cleaner::clean_article(recleaned) == cleaned,
            "cleaning is not idempotent on document " + std::to_string(doc));
  }
}

void check_split_law() {
  for (std::size_t n = 1; n <= 500; ++n) {
    std::vector<TrainingExample> examples;
    for (std::size_t i = 0; i < n; ++i) {
      TrainingExample ex;
      ex.paper_id = "P" + std::to_string(i);
      examples.push_back(ex);
    }
    const auto split = corpus_builder::split_dataset(examples, 11);
    const std::size_t want_train = (8 * n) / 10;
    const std::size_t want_val = n / 10;
    const std::size_t want_test = n - want_train - want_val;
    require(split.train.size() == want_train && split.validation.size() == want_val &&
                split.test.size() == want_test,
            "sizes for N=" + std::to_string(n) + " are " + std::to_string(split.train.size()) + "/" +
                std::to_string(split.validation.size()) + "/" + std::to_string(split.test.size()));

    std::set<std::string> seen;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
      for (const auto& ex : *part) {
        require(seen.insert(ex.paper_id).second,
                "partitions overlap at " + ex.paper_id + " for N=" + std::to_string(n));
      }
    }
    require(seen.size() == n, "partitions incomplete for N=" + std::to_string(n));

    const auto again = corpus_builder::split_dataset(examples, 11);
    require(again.train == split.train && again.validation == split.validation &&
                again.test == split.test,
            "seed 11 is not reproducible for N=" + std::to_string(n));
  }
}

// ---- end-to-end oracle identity through the installed CLI ---------------

void run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string command =
      std::string(MORTY_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
  const int rc = std::system(command.c_str());
  const int status = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  if (status != 0) {
    std::string tail;
    try {
      tail = testutil::read_file(log);
      if (tail.size() > 400) tail = "..." + tail.substr(tail.size() - 400);
    } catch (...) {
    }
    throw failure("CLI exited with status " + std::to_string(status) + " for: morty " + args +
                  "\n" + tail);
  }
}

void check_e2e_oracle_identity() {
  TempDir dir;
  const auto texts_dir = dir / "texts";
  std::filesystem::create_directories(texts_dir);

  const std::vector<std::string> locations = {"Singapore", "Oslo",   "Lima",  "Quito",
                                              "Accra",     "Vienna", "Dakar", "Hanoi"};
  const std::vector<std::string> approaches = {"neural pipeline", "rule engine", "hybrid system"};

  // Snapshot statements + article texts for 20 papers.
  std::ostringstream snapshot;
  std::set<std::string> all_values;
  std::size_t total_values = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "paper-" + std::to_string(i);
    const std::string location = locations[i % locations.size()];
    const std::string approach = approaches[i % approaches.size()];
    const std::string size_value = std::to_string(10 + i) + " meetings";

    for (const auto& [label, value] :
         std::vector<std::pair<std::string, std::string>>{{"Study location", location},
                                                          {"Approach", approach},
                                                          {"Data size", size_value}}) {
      snapshot << json{{"paper_id", id}, {"property_label", label}, {"value", value}}.dump() << "\n";
      all_values.insert(value);
      ++total_values;
    }

    const json article = {
        {"paper_id", id},
        {"title", "Synthetic study " + std::to_string(i)},
        {"sections",
         json::array({{{"label", "Introduction"},
                       {"paragraphs",
                        json::array({"We describe a " + approach + " evaluated in " + location +
                                     " on " + size_value + " [12]."})}},
                      {{"label", "References"},
                       {"paragraphs", json::array({"See https://example.org/ref (Lee et al., 2019)"})}}})},
    };
    testutil::write_file(texts_dir / (id + ".json"), article.dump());
  }
  testutil::write_file(dir / "snapshot.jsonl", snapshot.str());

  // Catalog covering half the distinct values.
  std::ostringstream catalog;
  std::set<std::string> covered;
  std::size_t index = 0;
  for (const auto& value : all_values) {
    if (index++ % 2 == 0) {
      catalog << json{{"entity_id", "E" + std::to_string(index)}, {"label", value}}.dump() << "\n";
      covered.insert(value);
    }
  }
  testutil::write_file(dir / "catalog.jsonl", catalog.str());

  const json config = {{"seed", 13},
                       {"paths",
                        {{"snapshot", (dir / "snapshot.jsonl").string()},
                         {"texts", texts_dir.string()},
                         {"dataset_dir", (dir / "dataset").string()},
                         {"catalog", (dir / "catalog.jsonl").string()}}}};
  testutil::write_file(dir / "config.json", config.dump());
  const std::string cfg = " --config " + (dir / "config.json").string();
  const auto log = dir / "cli.log";

  run_cli("build-dataset" + cfg, log);
  run_cli("split" + cfg, log);
  run_cli("predict" + cfg + " --backend oracle --input " + (dir / "dataset/dataset.jsonl").string() +
              " --out " + (dir / "predictions.jsonl").string(),
          log);
  run_cli("parse" + cfg + " --predictions " + (dir / "predictions.jsonl").string() + " --out " +
              (dir / "parsed.jsonl").string(),
          log);
  run_cli("evaluate" + cfg + " --predictions " + (dir / "predictions.jsonl").string() + " --gold " +
              (dir / "dataset/dataset.jsonl").string() + " --report " + (dir / "report.json").string(),
          log);

  const auto report = evaluator::load_report(dir / "report.json");
  require(report.evaluated == 20, "expected 20 evaluated papers, got " + std::to_string(report.evaluated));
  require(std::fabs(report.rouge.rouge1.f1 - 1.0) < 1e-12 &&
              std::fabs(report.rouge.rouge2.f1 - 1.0) < 1e-12 &&
              std::fabs(report.rouge.rougeL.f1 - 1.0) < 1e-12,
          "oracle ROUGE F1 != 1.0 (" + fmt(report.rouge.rouge1.f1) + ", " +
              fmt(report.rouge.rouge2.f1) + ", " + fmt(report.rouge.rougeL.f1) + ")");
  require(std::fabs(report.extraction.f1 - 1.0) < 1e-12,
          "oracle extraction micro F1 = " + fmt(report.extraction.f1) + ", want 1.0");

  run_cli("link" + cfg + " --parsed " + (dir / "parsed.jsonl").string() + " --out " +
              (dir / "statements.jsonl").string() + " --format jsonl",
          log);
  const auto statements =
      kg_linker::read_statements(dir / "statements.jsonl", kg_linker::StatementFormat::jsonl);
  require(statements.size() == total_values,
          "expected one statement per value (" + std::to_string(total_values) + "), got " +
              std::to_string(statements.size()));
  std::size_t entity_statements = 0;
  for (const auto& statement : statements) {
    if (statement.object_kind == kg_linker::ObjectKind::entity) {
      ++entity_statements;
    } else {
      require(!covered.contains(statement.object),
              "value '" + statement.object + "' is in the catalog but was emitted as a literal");
    }
  }
  // How many of the emitted values the catalog covers (entity statements
  // carry entity ids, so count from the snapshot side).
  std::size_t covered_values = 0;
  {
    std::istringstream in(snapshot.str());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      if (covered.contains(j.at("value").get<std::string>())) ++covered_values;
    }
  }
  require(entity_statements == covered_values,
          "expected " + std::to_string(covered_values) + " entity statements, got " +
              std::to_string(entity_statements));
}

void check_converter_soundness() {
  // Randomized slice-back and BIO well-formedness over generated corpora.
  std::mt19937_64 rng(97);
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "epsilon",
                                          "zeta",  "eta",  "theta", "iota",  "kappa"};
  std::size_t answer_spans = 0;

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 3 + rng() % 25;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
    const std::string text = strings::join(tokens, " ");

    AnnotationRecord record;
    record.paper_id = "P" + std::to_string(trial);
    for (const std::string& label : {"Study location", "Data size", "Approach"}) {
      std::vector<std::string> values;
      if (rng() % 2 == 0) {
        const std::size_t start = rng() % tokens.size();
        const std::size_t count = 1 + rng() % std::min<std::size_t>(3, tokens.size() - start);
        values.push_back(strings::join(
            std::vector<std::string>(tokens.begin() + start, tokens.begin() + start + count), " "));
      } else {
        values.push_back("absent-" + std::to_string(rng() % 50));
      }
      record.pairs.push_back({label, values});
    }

    TrainingExample example;
    example.paper_id = record.paper_id;
    example.input_text = text;
    example.input_token_count = strings::count_tokens(text);

    for (const auto& item : task_converters::to_qa_dataset({example}, {record})) {
      for (const auto& span : item.answers) {
        ++answer_spans;
        require(item.context.substr(span.char_start, span.text.size()) == span.text,
                "answer span does not slice back in trial " + std::to_string(trial));
      }
    }

    for (const auto& doc : task_converters::to_ner_dataset({example}, {record})) {
      require(doc.tokens.size() == doc.tags.size(),
              "token/tag length mismatch in trial " + std::to_string(trial));
      std::string active;
      for (const auto& tag : doc.tags) {
        if (tag == "O") {
          active.clear();
        } else if (tag.rfind("B-", 0) == 0) {
          active = tag.substr(2);
        } else if (tag.rfind("I-", 0) == 0) {
          require(!active.empty() && tag.substr(2) == active,
                  "BIO violation in trial " + std::to_string(trial) + ": dangling '" + tag + "'");
        } else {
          require(false, "unknown tag '" + tag + "' in trial " + std::to_string(trial));
        }
      }
    }
  }
  require(answer_spans > 0, "the generated corpora produced no answerable spans");

  // Token-overlap fixture: a superstring answer against a one-token gold.
  TrainingExample example;
  example.paper_id = "P1";
  example.input_text = "The City of Singapore hosted the study";
  const auto gold = task_converters::to_qa_dataset(
      {example}, {{"P1", {{"Study location", {"Singapore"}}}}});
  require(gold.size() == 1 && gold[0].is_answerable, "fixture item is not answerable");
  const auto scores =
      task_converters::score_qa_at1({{"P1", "Study location", "The City of Singapore"}}, gold);
  require(std::fabs(scores.f1 - 0.4) < 1e-12,
          "superstring answer token-F1 = " + fmt(scores.f1) + ", want exactly 0.4");
}

}  // namespace

int main() {
  criterion("rouge-oracle-equivalence", 10.0, check_rouge_oracle_equivalence);
  criterion("rouge-hand-fixtures", 0.0, check_rouge_hand_fixtures);
  criterion("codec-round-trip-and-totality", 5.0, check_codec_round_trip);
  criterion("cleaner-invariants", 0.0, check_cleaner_invariants);
  criterion("split-law", 0.0, check_split_law);
  criterion("e2e-oracle-identity", 30.0, check_e2e_oracle_identity);
  criterion("converter-soundness", 0.0, check_converter_soundness);

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
