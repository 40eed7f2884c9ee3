#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "morty/summary_codec.hpp"
#include "morty/types.hpp"

using namespace morty;
using summary_codec::normalize_pairs;
using summary_codec::parse;
using summary_codec::serialize;

TEST_CASE("serialize emits the documented delimiter format") {
  CHECK(serialize({"p1", {{"Study location", {"Singapore"}}}}) == "Study location :: Singapore");
  CHECK(serialize({"p2",
                   {{"Evaluation metrics", {"ROUGE-2", "ROUGE-SU4"}},
                    {"Summarization type", {"Abstractive"}}}}) ==
        "Evaluation metrics :: ROUGE-2 | ROUGE-SU4 ; Summarization type :: Abstractive");
}

TEST_CASE("reserved sequences are escaped to '/'") {
  CHECK(serialize({"p", {{"a;b", {"c|d"}}}}) == "a/b :: c/d");
  CHECK(serialize({"p", {{"x::y", {"v"}}}}) == "x/y :: v");
  CHECK(summary_codec::escape_reserved("a :: b | c ; d") == "a / b / c / d");
}

TEST_CASE("serialize rejects a record without pairs") {
  CHECK_THROWS_AS(serialize({"empty", {}}), morty::error);
}

TEST_CASE("tolerant parse collects malformed segments") {
  const auto summary = parse("foo :: a | b ; garbage text ; bar :: c", /*tolerant=*/true);
  CHECK(summary.pairs == std::vector<PropertyValuePair>{{"foo", {"a", "b"}}, {"bar", {"c"}}});
  CHECK(summary.malformed_segments == std::vector<std::string>{"garbage text"});
  CHECK_FALSE(summary.parse_complete);
}

TEST_CASE("strict parse throws, naming the malformed segment") {
  CHECK_THROWS_WITH_AS(parse("ok :: v ; broken segment", /*tolerant=*/false),
                       doctest::Contains("broken segment"), morty::format_error);
}

TEST_CASE("empty input parses to an empty, complete summary") {
  const auto summary = parse("", /*tolerant=*/true);
  CHECK(summary.pairs.empty());
  CHECK(summary.malformed_segments.empty());
  CHECK(summary.parse_complete);
}

TEST_CASE("whitespace-only segments are skipped silently") {
  const auto summary = parse("a :: b ; ; c :: d", /*tolerant=*/false);
  CHECK(summary.pairs == std::vector<PropertyValuePair>{{"a", {"b"}}, {"c", {"d"}}});
  CHECK(summary.parse_complete);
}

TEST_CASE("parser accepts irregular spacing") {
  const auto summary = parse("foo::a|b;bar::c");
  CHECK(summary.pairs == std::vector<PropertyValuePair>{{"foo", {"a", "b"}}, {"bar", {"c"}}});
}

TEST_CASE("segments split on the first ::, values keep later colons") {
  const auto summary = parse("time :: 12::30");
  REQUIRE(summary.pairs.size() == 1);
  CHECK(summary.pairs[0].property_label == "time");
  CHECK(summary.pairs[0].values == std::vector<std::string>{"12::30"});
}

TEST_CASE("duplicate labels merge by value union, first-occurrence order") {
  const auto summary = parse("A :: x ; B :: q ; A :: y");
  CHECK(summary.pairs ==
        std::vector<PropertyValuePair>{{"A", {"x", "y"}}, {"B", {"q"}}});
}

TEST_CASE("normalize_pairs canonicalizes") {
  CHECK(normalize_pairs({{"A ", {" x", "x"}}}) ==
        std::vector<PropertyValuePair>{{"A", {"x"}}});
  CHECK(normalize_pairs({{"A", {"x"}}, {"A", {"y"}}}) ==
        std::vector<PropertyValuePair>{{"A", {"x", "y"}}});
  CHECK(normalize_pairs({}) == std::vector<PropertyValuePair>{});
  // Pairs whose values all normalize away are dropped.
  CHECK(normalize_pairs({{"A", {"  ", ""}}}) == std::vector<PropertyValuePair>{});
}

namespace {

// Random printable-ASCII strings, reserved delimiters included; the
// round-trip property applies to post-escaping records, so the
// generator escapes and retries until the piece is non-empty.
std::string random_piece(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 :|;/.,-_()'";
  std::string piece;
  for (;;) {
    piece.clear();
    const std::size_t length = 1 + rng() % 12;
    for (std::size_t i = 0; i < length; ++i) piece += alphabet[rng() % alphabet.size()];
    piece = summary_codec::escape_reserved(piece);
    // Normalization must not erase it, or serialize/parse see different records.
    if (!normalize_pairs({{piece, {piece}}}).empty()) return piece;
  }
}

AnnotationRecord random_record(std::mt19937_64& rng) {
  AnnotationRecord record;
  record.paper_id = "paper-" + std::to_string(rng() % 1000);
  const std::size_t pair_count = 1 + rng() % 4;
  for (std::size_t i = 0; i < pair_count; ++i) {
    PropertyValuePair pair;
    pair.property_label = random_piece(rng);
    const std::size_t value_count = 1 + rng() % 3;
    for (std::size_t j = 0; j < value_count; ++j) pair.values.push_back(random_piece(rng));
    record.pairs.push_back(std::move(pair));
  }
  return record;
}

}  // namespace

TEST_CASE("property: parse(serialize(R)) recovers R's normalized pairs") {
  std::mt19937_64 rng(20240817);
  for (int i = 0; i < 1000; ++i) {
    const AnnotationRecord record = random_record(rng);
    const auto summary = parse(serialize(record), /*tolerant=*/false);
    CHECK(summary.pairs == normalize_pairs(record.pairs));
    CHECK(summary.parse_complete);
  }
}

TEST_CASE("property: tolerant parse is total on noise") {
  std::mt19937_64 rng(4711);
  for (int i = 0; i < 1000; ++i) {
    std::string noise;
    const std::size_t length = rng() % 64;
    for (std::size_t j = 0; j < length; ++j)
      noise += static_cast<char>(1 + rng() % 255);  // any non-NUL byte
    const auto summary = parse(noise, /*tolerant=*/true);
    CHECK(summary.parse_complete == summary.malformed_segments.empty());
    for (const auto& pair : summary.pairs) {
      CHECK_FALSE(pair.property_label.empty());
      CHECK_FALSE(pair.values.empty());
    }
  }
}
