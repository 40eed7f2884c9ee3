#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "morty/strings.hpp"
#include "morty/task_converters.hpp"
#include "morty/types.hpp"
#include "test_util.hpp"

using namespace morty;
using namespace morty::task_converters;
using testutil::TempDir;

namespace {

TrainingExample example(std::string id, std::string text) {
  TrainingExample ex;
  ex.paper_id = std::move(id);
  ex.input_text = std::move(text);
  ex.input_token_count = strings::count_tokens(ex.input_text);
  return ex;
}

// Every I- tag must continue a run started by a B- tag of the same class.
bool bio_well_formed(const NERDocument& doc) {
  if (doc.tokens.size() != doc.tags.size()) return false;
  std::string active;  // class of the open entity, "" outside one
  for (const auto& tag : doc.tags) {
    if (tag == "O") {
      active.clear();
    } else if (tag.rfind("B-", 0) == 0) {
      active = tag.substr(2);
      if (active.empty()) return false;
    } else if (tag.rfind("I-", 0) == 0) {
      if (active.empty() || tag.substr(2) != active) return false;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("question_for wraps the property label verbatim") {
  CHECK(question_for("Study location") == "what is the Study location?");
  CHECK(question_for("Data size") == "what is the Data size?");
}

TEST_CASE("to_qa_dataset locates exact value occurrences") {
  SUBCASE("a span at a known offset slices back to its text") {
    const std::string context = std::string(119, 'a') + " Singapore is the study site";
    const auto items = to_qa_dataset({example("P1", context)},
                                     {{"P1", {{"Study location", {"Singapore"}}}}});
    REQUIRE(items.size() == 1);
    const QAItem& item = items[0];
    CHECK(item.question == "what is the Study location?");
    CHECK(item.is_answerable);
    REQUIRE(item.answers.size() == 1);
    CHECK(item.answers[0].char_start == 120);
    CHECK(item.answers[0].text == "Singapore");
    CHECK(item.context.substr(item.answers[0].char_start, item.answers[0].text.size()) ==
          item.answers[0].text);
  }

  SUBCASE("a value absent from the context makes the item unanswerable") {
    const auto items = to_qa_dataset({example("P1", "the corpus has many meetings")},
                                     {{"P1", {{"Data size", {"139 meetings"}}}}});
    REQUIRE(items.size() == 1);
    CHECK_FALSE(items[0].is_answerable);
    CHECK(items[0].answers.empty());
  }

  SUBCASE("repeated occurrences are all reported, ascending") {
    const auto items = to_qa_dataset({example("P1", "Singapore is big. We love Singapore")},
                                     {{"P1", {{"Study location", {"Singapore"}}}}});
    REQUIRE(items.size() == 1);
    REQUIRE(items[0].answers.size() == 2);
    CHECK(items[0].answers[0].char_start == 0);
    CHECK(items[0].answers[1].char_start == 26);
  }

  SUBCASE("overlapping occurrences count separately") {
    const auto items = to_qa_dataset({example("P1", "aaa")}, {{"P1", {{"X", {"aa"}}}}});
    REQUIRE(items.size() == 1);
    REQUIRE(items[0].answers.size() == 2);
    CHECK(items[0].answers[0].char_start == 0);
    CHECK(items[0].answers[1].char_start == 1);
  }

  SUBCASE("matching is case-sensitive") {
    const auto items = to_qa_dataset({example("P1", "we visited singapore")},
                                     {{"P1", {{"Study location", {"Singapore"}}}}});
    REQUIRE(items.size() == 1);
    CHECK_FALSE(items[0].is_answerable);
  }

  SUBCASE("examples without a matching record are skipped") {
    CHECK(to_qa_dataset({example("P9", "text")}, {{"P1", {{"A", {"x"}}}}}).empty());
  }
}

TEST_CASE("to_ner_dataset produces aligned BIO tags") {
  SUBCASE("a single-token entity gets one B- tag") {
    const auto docs = to_ner_dataset({example("P1", "The study ran in Singapore today")},
                                     {{"P1", {{"Study location", {"Singapore"}}}}});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tags == std::vector<std::string>{"O", "O", "O", "O", "B-Study location", "O"});
    CHECK(bio_well_formed(docs[0]));
  }

  SUBCASE("a multi-token entity continues with I- tags") {
    const auto docs = to_ner_dataset({example("P1", "We apply Anaphora resolution here")},
                                     {{"P1", {{"Preprocessing steps", {"Anaphora resolution"}}}}});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tags ==
          std::vector<std::string>{"O", "O", "B-Preprocessing steps", "I-Preprocessing steps", "O"});
  }

  SUBCASE("the longest candidate wins overlaps") {
    const auto docs = to_ner_dataset(
        {example("P1", "machine learning rocks")},
        {{"P1", {{"Approach", {"machine learning"}}, {"Topic", {"learning"}}}}});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tags == std::vector<std::string>{"B-Approach", "I-Approach", "O"});
  }

  SUBCASE("equal-length ties resolve to the lexicographically smaller label") {
    const auto docs = to_ner_dataset({example("P1", "x y")},
                                     {{"P1", {{"Beta", {"x"}}, {"Alpha", {"x"}}}}});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tags[0] == "B-Alpha");
  }

  SUBCASE("values longer than the document never match") {
    const auto docs = to_ner_dataset({example("P1", "one")}, {{"P1", {{"A", {"one two three"}}}}});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tags == std::vector<std::string>{"O"});
  }
}

TEST_CASE("score_qa_at1 token overlap") {
  const std::string context = "The City of Singapore hosted the study";
  const auto gold = to_qa_dataset({example("P1", context)},
                                  {{"P1", {{"Study location", {"Singapore"}}}}});
  REQUIRE(gold.size() == 1);
  REQUIRE(gold[0].is_answerable);

  SUBCASE("a superstring answer earns partial credit") {
    const auto scores = score_qa_at1({{"P1", "Study location", "The City of Singapore"}}, gold);
    CHECK(scores.precision == doctest::Approx(0.25));
    CHECK(scores.recall == doctest::Approx(1.0));
    CHECK(scores.f1 == doctest::Approx(0.4));
  }

  SUBCASE("an exact answer scores 1.0") {
    const auto scores = score_qa_at1({{"P1", "Study location", "Singapore"}}, gold);
    CHECK(scores.f1 == doctest::Approx(1.0));
  }

  SUBCASE("only the first listed prediction per item counts") {
    const auto scores = score_qa_at1(
        {{"P1", "Study location", "Singapore"}, {"P1", "Study location", "junk"}}, gold);
    CHECK(scores.f1 == doctest::Approx(1.0));
  }

  SUBCASE("a missing prediction for an answerable item scores zero") {
    const auto scores = score_qa_at1({}, gold);
    CHECK(scores.f1 == 0.0);
    CHECK(scores.per_property.at("Study location").support == 1);
  }

  SUBCASE("a prediction for an unknown item is an error") {
    CHECK_THROWS_AS(score_qa_at1({{"P9", "Study location", "x"}}, gold), morty::error);
    CHECK_THROWS_AS(score_qa_at1({{"P1", "Wrong label", "x"}}, gold), morty::error);
  }
}

TEST_CASE("score_qa_at1 handles unanswerable items and macro-averages") {
  const auto gold = to_qa_dataset({example("P1", "The City of Singapore hosted the study")},
                                  {{"P1",
                                    {{"Study location", {"Singapore"}},
                                     {"Data size", {"139 meetings"}}}}});
  REQUIRE(gold.size() == 2);
  REQUIRE_FALSE(gold[1].is_answerable);

  SUBCASE("empty answer to an unanswerable item scores 1.0") {
    const auto scores = score_qa_at1({{"P1", "Study location", "Singapore"}}, gold);
    CHECK(scores.f1 == doctest::Approx(1.0));
  }

  SUBCASE("non-empty answer to an unanswerable item scores 0") {
    const auto scores = score_qa_at1({{"P1", "Study location", "Singapore"},
                                      {"P1", "Data size", "139 meetings"}},
                                     gold);
    CHECK(scores.f1 == doctest::Approx(0.5));  // macro mean of 1.0 and 0.0
    CHECK(scores.per_property.at("Data size").f1 == 0.0);
  }

  SUBCASE("macro mean over mixed item scores") {
    const auto scores = score_qa_at1({{"P1", "Study location", "The City of Singapore"}}, gold);
    CHECK(scores.f1 == doctest::Approx((0.4 + 1.0) / 2.0));
  }
}

TEST_CASE("score_ner counts exact-boundary exact-class entities") {
  const NERDocument gold{"P1",
                         {"We", "apply", "Anaphora", "resolution", "in", "Singapore"},
                         {"O", "O", "B-Steps", "I-Steps", "O", "B-Location"}};

  SUBCASE("identity scores 1.0") {
    const auto scores = score_ner({gold}, {gold});
    CHECK(scores.precision == doctest::Approx(1.0));
    CHECK(scores.recall == doctest::Approx(1.0));
    CHECK(scores.per_property.at("Steps").support == 1);
    CHECK(scores.per_property.at("Location").support == 1);
  }

  SUBCASE("one hit of two gold entities plus one spurious gives 0.5") {
    const NERDocument predicted{"P1",
                                gold.tokens,
                                {"B-Steps", "O", "B-Steps", "I-Steps", "O", "O"}};
    const auto scores = score_ner({predicted}, {gold});
    CHECK(scores.precision == doctest::Approx(0.5));
    CHECK(scores.recall == doctest::Approx(0.5));
    CHECK(scores.f1 == doctest::Approx(0.5));
  }

  SUBCASE("a boundary mismatch is both a miss and a false positive") {
    const NERDocument predicted{"P1",
                                gold.tokens,
                                {"O", "O", "B-Steps", "O", "O", "B-Location"}};
    const auto scores = score_ner({predicted}, {gold});
    CHECK(scores.recall == doctest::Approx(0.5));   // only Location found
    CHECK(scores.precision == doctest::Approx(0.5));
  }

  SUBCASE("a class mismatch at identical boundaries does not count") {
    const NERDocument predicted{"P1",
                                gold.tokens,
                                {"O", "O", "B-Wrong", "I-Wrong", "O", "B-Location"}};
    const auto scores = score_ner({predicted}, {gold});
    CHECK(scores.recall == doctest::Approx(0.5));
  }

  SUBCASE("token length mismatch is a format error") {
    const NERDocument predicted{"P1", {"We"}, {"O"}};
    CHECK_THROWS_AS(score_ner({predicted}, {gold}), morty::format_error);
  }

  SUBCASE("document count mismatch is a format error") {
    CHECK_THROWS_AS(score_ner({}, {gold}), morty::format_error);
  }
}

TEST_CASE("SQuAD-style JSON round-trips QA items") {
  TempDir dir;
  const auto items = to_qa_dataset(
      {example("P1", "The City of Singapore hosted the study"),
       example("P2", "We report results on 139 meetings")},
      {{"P1", {{"Study location", {"Singapore"}}, {"Data size", {"139 meetings"}}}},
       {"P2", {{"Data size", {"139 meetings"}}}}});
  const auto path = dir / "qa.json";
  write_squad_json(path, items);
  CHECK(read_squad_json(path) == items);
}

TEST_CASE("CoNLL files round-trip tokens and tags") {
  TempDir dir;
  const std::vector<NERDocument> docs = {
      {"P1", {"a", "b"}, {"B-X", "O"}},
      {"P2", {"c", "d", "e"}, {"O", "B-Long label", "I-Long label"}}};
  const auto path = dir / "ner.conll";
  write_conll(path, docs);
  const auto loaded = read_conll(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].paper_id == "doc-0");  // the format carries no ids
  CHECK(loaded[0].tokens == docs[0].tokens);
  CHECK(loaded[0].tags == docs[0].tags);
  CHECK(loaded[1].tokens == docs[1].tokens);
  CHECK(loaded[1].tags == docs[1].tags);

  SUBCASE("a line without a tab is rejected with its line number") {
    testutil::write_file(dir / "bad.conll", "a\tO\nbroken line\n");
    CHECK_THROWS_WITH_AS(read_conll(dir / "bad.conll"),
                         doctest::Contains(":2:"), morty::format_error);
  }
}

TEST_CASE("QA prediction JSONL round-trips") {
  TempDir dir;
  const std::vector<QAPrediction> predictions = {{"P1", "Study location", "Singapore"},
                                                 {"P2", "Data size", ""}};
  const auto path = dir / "qa_predictions.jsonl";
  write_qa_predictions(path, predictions);
  const auto loaded = read_qa_predictions(path);
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].paper_id == predictions[i].paper_id);
    CHECK(loaded[i].property_label == predictions[i].property_label);
    CHECK(loaded[i].answer_text == predictions[i].answer_text);
  }

  SUBCASE("malformed lines are rejected with their line number") {
    testutil::write_file(dir / "bad.jsonl", "{\"paper_id\": \"P1\"}\n");
    CHECK_THROWS_AS(read_qa_predictions(dir / "bad.jsonl"), morty::format_error);
  }
}

TEST_CASE("property: converted tasks stay internally consistent") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> vocab = {"alpha", "beta",  "gamma", "delta", "epsilon",
                                          "zeta",  "theta", "kappa", "sigma", "omega"};
  const std::vector<std::string> labels = {"Study location", "Data size", "Approach"};

  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 3 + rng() % 20;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
    const std::string text = strings::join(tokens, " ");

    AnnotationRecord record;
    record.paper_id = "P" + std::to_string(trial);
    for (const auto& label : labels) {
      if (rng() % 3 == 0) continue;
      // Half the values are slices of the text (answerable), half are not.
      std::vector<std::string> values;
      if (rng() % 2 == 0) {
        const std::size_t start = rng() % tokens.size();
        const std::size_t count = 1 + rng() % std::min<std::size_t>(3, tokens.size() - start);
        values.push_back(strings::join(
            std::vector<std::string>(tokens.begin() + start, tokens.begin() + start + count), " "));
      } else {
        values.push_back("unseen-" + std::to_string(rng() % 100));
      }
      record.pairs.push_back({label, values});
    }
    if (record.pairs.empty()) record.pairs.push_back({"Approach", {"unseen"}});

    const auto qa = to_qa_dataset({example(record.paper_id, text)}, {record});
    for (const auto& item : qa) {
      CHECK(item.is_answerable == !item.answers.empty());
      for (std::size_t i = 0; i < item.answers.size(); ++i) {
        const auto& span = item.answers[i];
        CHECK(item.context.substr(span.char_start, span.text.size()) == span.text);
        if (i > 0) CHECK(item.answers[i - 1].char_start <= span.char_start);
      }
    }

    const auto ner = to_ner_dataset({example(record.paper_id, text)}, {record});
    REQUIRE(ner.size() == 1);
    CHECK(ner[0].tokens.size() == ner[0].tags.size());
    CHECK(bio_well_formed(ner[0]));
  }
}
