// morty — property-value extraction from scholarly articles via
// structured summaries.
//
// Subcommands compose over file contracts (JSONL datasets, prediction
// files, reports); see README.md for the end-to-end walkthrough. Errors
// print a single `error: <category>: <message>` line and map onto
// sysexits-style codes: 64 usage, 65 format, 69 capability, 74 io,
// 78 config, 70 anything else.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "morty/config.hpp"
#include "morty/corpus_builder.hpp"
#include "morty/dataset_io.hpp"
#include "morty/evaluator.hpp"
#include "morty/kg_linker.hpp"
#include "morty/summarizer.hpp"
#include "morty/summary_codec.hpp"
#include "morty/task_converters.hpp"
#include "morty/text_cleaner.hpp"
#include "morty/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_file;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "Pipeline config file (JSON)");
  opts.seed_opt = cmd->add_option("--seed", opts.seed, "Random seed (overrides config)");
}

// Config file plus flag overrides; flags win.
morty::config::PipelineConfig effective_config(const CommonOpts& opts) {
  morty::config::PipelineConfig config;
  if (!opts.config_file.empty()) config = morty::config::load_config(opts.config_file);
  if (opts.seed_opt != nullptr && opts.seed_opt->count() > 0) {
    config.seed = opts.seed;
    config.summarizer.seed = opts.seed;
  }
  return config;
}

fs::path pick_path(const std::string& flag_value, const fs::path& config_value,
                   const char* what, const char* how) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  throw morty::config_error(std::string(what) + " required (" + how + ")");
}

std::string fmt3(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", v);
  return buffer;
}

// Only used to derive output filenames from paper ids.
std::string sanitize_filename(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += safe ? c : '_';
  }
  return out.empty() ? "_" : out;
}

void print_report_headline(const morty::evaluator::EvaluationReport& report) {
  const auto line = [](const char* name, const morty::evaluator::Score& s) {
    std::cout << name << "  p " << fmt3(s.precision) << "  r " << fmt3(s.recall) << "  f1 "
              << fmt3(s.f1) << "\n";
  };
  line("rouge-1", report.rouge.rouge1);
  line("rouge-2", report.rouge.rouge2);
  line("rouge-l", report.rouge.rougeL);
  std::cout << "extraction (micro)  p " << fmt3(report.extraction.precision) << "  r "
            << fmt3(report.extraction.recall) << "  f1 " << fmt3(report.extraction.f1) << "\n";
  std::cout << report.evaluated << " gold example(s), " << report.missing_predictions
            << " without a prediction\n";
}

void write_task_scores_json(const fs::path& path, const char* task,
                            const morty::evaluator::ExtractionScores& scores) {
  json per_property = json::object();
  for (const auto& [label, s] : scores.per_property) {
    per_property[label] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  const json out = {{"task", task},
                    {"precision", scores.precision},
                    {"recall", scores.recall},
                    {"f1", scores.f1},
                    {"per_property", per_property}};
  std::ofstream file(path);
  if (!file) throw morty::io_error("cannot write report: " + path.string());
  file << out.dump(2) << "\n";
}

// Gold AnnotationRecords reconstructed from dataset targets; strict
// parse because build-dataset guarantees canonical targets.
std::vector<morty::AnnotationRecord> records_from_dataset(
    const std::vector<morty::TrainingExample>& examples) {
  std::vector<morty::AnnotationRecord> records;
  records.reserve(examples.size());
  for (const auto& example : examples) {
    const auto parsed = morty::summary_codec::parse(example.target_summary, /*tolerant=*/false);
    records.push_back(morty::AnnotationRecord{example.paper_id, parsed.pairs});
  }
  return records;
}

// --- subcommand handlers ------------------------------------------------

struct BuildDatasetOpts {
  CommonOpts common;
  std::string snapshot;
  std::string texts;
  std::string out_dir;
  std::vector<std::string> blocklist;
};

void run_build_dataset(const BuildDatasetOpts& opts) {
  const auto config = effective_config(opts.common);
  const fs::path snapshot = pick_path(opts.snapshot, config.paths.snapshot, "snapshot path",
                                      "--snapshot or config paths.snapshot");
  const fs::path texts = pick_path(opts.texts, config.paths.texts, "article text directory",
                                   "--texts or config paths.texts");
  const fs::path out_dir = pick_path(opts.out_dir, config.paths.dataset_dir, "output directory",
                                     "--out or config paths.dataset_dir");

  std::vector<std::string> blocklist = config.property_blocklist;
  blocklist.insert(blocklist.end(), opts.blocklist.begin(), opts.blocklist.end());

  const auto records = morty::corpus_builder::load_kg_snapshot(snapshot, blocklist);
  const auto articles = morty::dataset_io::load_articles_dir(texts);
  const auto cleaner = [&config](const morty::ArticleText& article) {
    return morty::text_cleaner::clean_article(article, config.cleaning);
  };
  const auto pairing = morty::corpus_builder::pair_corpus(records, articles, cleaner);
  if (pairing.examples.empty())
    throw morty::error("no annotation record matched an article text");
  const auto stats = morty::corpus_builder::corpus_stats(pairing.examples);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  morty::dataset_io::write_dataset_jsonl(out_dir / "dataset.jsonl", pairing.examples);
  morty::dataset_io::write_dataset_manifest(out_dir / "dataset_manifest.json", config.seed,
                                            pairing, stats);

  for (const auto& paper_id : pairing.unmatched_paper_ids)
    std::cerr << "warning: no article text for paper '" << paper_id << "'\n";
  std::cout << "wrote " << pairing.examples.size() << " training example(s) to "
            << (out_dir / "dataset.jsonl").string() << " (" << pairing.unmatched_paper_ids.size()
            << " unmatched annotation record(s))\n";
}

struct SplitOpts {
  CommonOpts common;
  std::string dataset;
  std::string out_prefix;
};

void run_split(const SplitOpts& opts) {
  const auto config = effective_config(opts.common);
  const fs::path dataset =
      pick_path(opts.dataset,
                config.paths.dataset_dir.empty() ? fs::path{}
                                                 : config.paths.dataset_dir / "dataset.jsonl",
                "dataset file", "--dataset or config paths.dataset_dir");
  const fs::path prefix =
      pick_path(opts.out_prefix,
                config.paths.dataset_dir.empty() ? fs::path{}
                                                 : config.paths.dataset_dir / "dataset",
                "output prefix", "--out-prefix or config paths.dataset_dir");

  auto examples = morty::dataset_io::read_dataset_jsonl(dataset);
  const auto split = morty::corpus_builder::split_dataset(std::move(examples), config.seed);
  morty::dataset_io::write_split_files(split, prefix);
  std::cout << "split " << (split.train.size() + split.validation.size() + split.test.size())
            << " example(s) into train/val/test = " << split.train.size() << "/"
            << split.validation.size() << "/" << split.test.size() << " (seed " << split.seed
            << ") at " << prefix.string() << ".{train,val,test}.jsonl\n";
}

struct CleanOpts {
  CommonOpts common;
  std::string texts;
  std::string article;
  std::string out;
};

void run_clean(const CleanOpts& opts) {
  const auto config = effective_config(opts.common);
  if (opts.article.empty() == opts.texts.empty())
    throw morty::config_error("clean needs exactly one of --article or --texts");

  if (!opts.article.empty()) {
    const auto article = morty::dataset_io::load_article_json(opts.article);
    const std::string cleaned = morty::text_cleaner::clean_article(article, config.cleaning);
    if (opts.out.empty()) {
      std::cout << cleaned << "\n";
    } else {
      std::ofstream out(opts.out);
      if (!out) throw morty::io_error("cannot write " + opts.out);
      out << cleaned << "\n";
    }
    return;
  }

  if (opts.out.empty())
    throw morty::config_error("--out directory required with --texts");
  const auto articles = morty::dataset_io::load_articles_dir(opts.texts);
  std::error_code ec;
  fs::create_directories(opts.out, ec);
  for (const auto& article : articles) {
    const fs::path path = fs::path(opts.out) / (sanitize_filename(article.paper_id) + ".txt");
    std::ofstream out(path);
    if (!out) throw morty::io_error("cannot write " + path.string());
    out << morty::text_cleaner::clean_article(article, config.cleaning) << "\n";
  }
  std::cout << "cleaned " << articles.size() << " article(s) into " << opts.out << "\n";
}

struct TrainOpts {
  CommonOpts common;
  std::string train;
  std::string val;
  std::string checkpoints;
  std::string backend;
  std::size_t max_epochs = 0;
  std::size_t batch_size = 0;
};

void run_train(const TrainOpts& opts) {
  auto config = effective_config(opts.common);
  auto summarizer_config = config.summarizer;
  if (!opts.backend.empty())
    summarizer_config.backend = morty::summarizer::backend_kind_from_string(opts.backend);
  if (!opts.checkpoints.empty()) summarizer_config.checkpoint_dir = opts.checkpoints;
  if (opts.max_epochs > 0) summarizer_config.max_epochs = opts.max_epochs;
  if (opts.batch_size > 0) summarizer_config.batch_size = opts.batch_size;

  const fs::path train_path =
      pick_path(opts.train, fs::path{}, "training dataset", "--train");
  const auto train = morty::dataset_io::read_dataset_jsonl(train_path);
  if (train.empty()) throw morty::format_error("training dataset is empty: " + train_path.string());
  std::vector<morty::TrainingExample> validation;
  if (!opts.val.empty()) validation = morty::dataset_io::read_dataset_jsonl(opts.val);

  const auto model = morty::summarizer::fit(train, validation, summarizer_config);
  const auto& log = model.training_log();
  double best = log.front().validation_loss;
  for (const auto& entry : log) best = std::min(best, entry.validation_loss);
  std::cout << "fit complete: " << log.size() << " epoch(s), best validation loss " << best
            << "; checkpoints in " << summarizer_config.checkpoint_dir.string() << "\n";
}

struct PredictOpts {
  CommonOpts common;
  std::string input;
  std::string out;
  std::string backend;
  std::string train;
  std::string checkpoints;
};

void run_predict(const PredictOpts& opts) {
  auto config = effective_config(opts.common);
  auto summarizer_config = config.summarizer;
  if (!opts.backend.empty())
    summarizer_config.backend = morty::summarizer::backend_kind_from_string(opts.backend);
  if (!opts.checkpoints.empty()) summarizer_config.checkpoint_dir = opts.checkpoints;

  const fs::path input = pick_path(opts.input, fs::path{}, "input dataset", "--input");
  const fs::path out = pick_path(opts.out, fs::path{}, "output path", "--out");
  const auto examples = morty::dataset_io::read_dataset_jsonl(input);

  std::vector<morty::Prediction> predictions;
  predictions.reserve(examples.size());
  switch (summarizer_config.backend) {
    case morty::summarizer::BackendKind::oracle: {
      const morty::summarizer::OracleSummarizer oracle;
      for (const auto& example : examples) {
        const auto parsed =
            morty::summary_codec::parse(example.target_summary, /*tolerant=*/false);
        const morty::AnnotationRecord gold{example.paper_id, parsed.pairs};
        predictions.push_back({example.paper_id, oracle.generate(example.input_text, &gold)});
      }
      break;
    }
    case morty::summarizer::BackendKind::lead_baseline: {
      if (opts.train.empty())
        throw morty::config_error(
            "lead_baseline backend needs --train (the split the property labels come from)");
      const auto train = morty::dataset_io::read_dataset_jsonl(opts.train);
      const auto model = morty::summarizer::LeadBaselineSummarizer::from_training(train);
      for (const auto& example : examples)
        predictions.push_back({example.paper_id, model.generate(example.input_text, nullptr)});
      break;
    }
    case morty::summarizer::BackendKind::neural: {
      const auto model = morty::summarizer::NeuralSummarizer::open(summarizer_config);
      std::vector<std::pair<std::string, std::string>> id_texts;
      id_texts.reserve(examples.size());
      for (const auto& example : examples)
        id_texts.emplace_back(example.paper_id, example.input_text);
      predictions = model.generate_batch(id_texts);
      break;
    }
  }

  morty::dataset_io::write_predictions_jsonl(out, predictions);
  std::cout << "wrote " << predictions.size() << " prediction(s) to " << out.string()
            << " (backend " << morty::summarizer::to_string(summarizer_config.backend) << ")\n";
}

struct ParseOpts {
  CommonOpts common;
  std::string predictions;
  std::string out;
  bool strict = false;
  bool tolerant = false;
};

void run_parse(const ParseOpts& opts) {
  const fs::path predictions_path =
      pick_path(opts.predictions, fs::path{}, "predictions file", "--predictions");
  const fs::path out = pick_path(opts.out, fs::path{}, "output path", "--out");
  const auto predictions = morty::dataset_io::read_predictions_jsonl(predictions_path);

  std::vector<morty::dataset_io::ParsedSummaryRecord> records;
  std::size_t incomplete = 0;
  records.reserve(predictions.size());
  for (const auto& prediction : predictions) {
    const auto summary =
        morty::summary_codec::parse(prediction.prediction, /*tolerant=*/!opts.strict);
    if (!summary.parse_complete) ++incomplete;
    records.push_back({prediction.paper_id, summary.pairs, summary.malformed_segments,
                       summary.parse_complete});
  }
  morty::dataset_io::write_parsed_jsonl(out, records);
  std::cout << "parsed " << records.size() << " prediction(s) (" << incomplete
            << " with malformed segments) to " << out.string() << "\n";
}

struct LinkOpts {
  CommonOpts common;
  std::string parsed;
  std::string catalog;
  std::string out;
  std::string format = "jsonl";
};

void run_link(const LinkOpts& opts) {
  const auto config = effective_config(opts.common);
  const fs::path parsed_path = pick_path(opts.parsed, fs::path{}, "parsed summaries", "--parsed");
  const fs::path catalog_path = pick_path(opts.catalog, config.paths.catalog, "entity catalog",
                                          "--catalog or config paths.catalog");
  const fs::path out = pick_path(opts.out, fs::path{}, "output path", "--out");

  morty::kg_linker::StatementFormat format;
  if (opts.format == "jsonl") {
    format = morty::kg_linker::StatementFormat::jsonl;
  } else if (opts.format == "ntriples") {
    format = morty::kg_linker::StatementFormat::ntriples_like;
  } else {
    throw morty::config_error("unknown --format '" + opts.format +
                              "' (expected jsonl or ntriples)");
  }

  const auto catalog = morty::kg_linker::load_catalog(catalog_path);
  for (const auto& warning : catalog.warnings) std::cerr << "warning: " << warning << "\n";

  std::vector<morty::kg_linker::Statement> statements;
  for (const auto& record : morty::dataset_io::read_parsed_jsonl(parsed_path)) {
    morty::summary_codec::StructuredSummary summary;
    summary.pairs = record.pairs;
    summary.malformed_segments = record.malformed_segments;
    summary.parse_complete = record.parse_complete;
    const auto linked = morty::kg_linker::link(summary, record.paper_id, catalog);
    statements.insert(statements.end(), linked.begin(), linked.end());
  }

  std::size_t entities = 0;
  for (const auto& statement : statements)
    if (statement.object_kind == morty::kg_linker::ObjectKind::entity) ++entities;
  morty::kg_linker::emit_statements(statements, out, format);
  std::cout << "wrote " << statements.size() << " statement(s) (" << entities << " entity, "
            << (statements.size() - entities) << " literal) to " << out.string() << "\n";
}

struct EvaluateOpts {
  CommonOpts common;
  std::string task = "summary";
  std::string predictions;
  std::string gold;
  std::string report;
};

void run_evaluate(const EvaluateOpts& opts) {
  const fs::path predictions_path =
      pick_path(opts.predictions, fs::path{}, "predictions file", "--predictions");
  const fs::path gold_path = pick_path(opts.gold, fs::path{}, "gold file", "--gold");

  if (opts.task == "summary") {
    const auto predictions = morty::dataset_io::read_predictions_jsonl(predictions_path);
    const auto gold = morty::dataset_io::read_dataset_jsonl(gold_path);
    const auto report = morty::evaluator::build_report(predictions, gold);
    if (!opts.report.empty()) morty::evaluator::render_report(report, opts.report);
    print_report_headline(report);
    if (report.missing_predictions > 0)
      std::cerr << "warning: " << report.missing_predictions
                << " gold example(s) had no prediction; scored as empty\n";
    return;
  }

  morty::evaluator::ExtractionScores scores;
  const char* label = nullptr;
  if (opts.task == "qa") {
    const auto predictions = morty::task_converters::read_qa_predictions(predictions_path);
    const auto gold = morty::task_converters::read_squad_json(gold_path);
    scores = morty::task_converters::score_qa_at1(predictions, gold);
    label = "qa @1 token-overlap";
  } else if (opts.task == "ner") {
    const auto predictions = morty::task_converters::read_conll(predictions_path);
    const auto gold = morty::task_converters::read_conll(gold_path);
    scores = morty::task_converters::score_ner(predictions, gold);
    label = "ner entity-level";
  } else {
    throw morty::config_error("unknown --task '" + opts.task +
                              "' (expected summary, qa or ner)");
  }

  std::cout << label << "  p " << fmt3(scores.precision) << "  r " << fmt3(scores.recall)
            << "  f1 " << fmt3(scores.f1) << "\n";
  for (const auto& [property, s] : scores.per_property)
    std::cout << "  " << property << "  p " << fmt3(s.precision) << "  r " << fmt3(s.recall)
              << "  f1 " << fmt3(s.f1) << "  (support " << s.support << ")\n";
  if (!opts.report.empty())
    write_task_scores_json(opts.report, opts.task.c_str(), scores);
}

struct ConvertOpts {
  CommonOpts common;
  std::string dataset;
  std::string out;
};

void run_convert_qa(const ConvertOpts& opts) {
  const fs::path dataset = pick_path(opts.dataset, fs::path{}, "dataset file", "--dataset");
  const fs::path out = pick_path(opts.out, fs::path{}, "output path", "--out");
  const auto examples = morty::dataset_io::read_dataset_jsonl(dataset);
  const auto items =
      morty::task_converters::to_qa_dataset(examples, records_from_dataset(examples));
  morty::task_converters::write_squad_json(out, items);
  std::size_t answerable = 0;
  for (const auto& item : items)
    if (item.is_answerable) ++answerable;
  std::cout << "wrote " << items.size() << " QA item(s) (" << answerable << " answerable) to "
            << out.string() << "\n";
}

void run_convert_ner(const ConvertOpts& opts) {
  const fs::path dataset = pick_path(opts.dataset, fs::path{}, "dataset file", "--dataset");
  const fs::path out = pick_path(opts.out, fs::path{}, "output path", "--out");
  const auto examples = morty::dataset_io::read_dataset_jsonl(dataset);
  const auto documents =
      morty::task_converters::to_ner_dataset(examples, records_from_dataset(examples));
  morty::task_converters::write_conll(out, documents);
  std::size_t tagged = 0;
  for (const auto& document : documents)
    for (const auto& tag : document.tags)
      if (tag != "O") ++tagged;
  std::cout << "wrote " << documents.size() << " NER document(s) (" << tagged
            << " tagged token(s)) to " << out.string() << "\n";
}

struct ReportOpts {
  CommonOpts common;
  std::string in;
};

void run_report(const ReportOpts& opts) {
  const fs::path in = pick_path(opts.in, fs::path{}, "report JSON", "--in");
  const auto report = morty::evaluator::load_report(in);
  morty::evaluator::render_report(report, in);  // refreshes the Markdown sibling
  fs::path md = in;
  md.replace_extension(".md");
  print_report_headline(report);
  std::cout << "wrote " << md.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morty: extract property-value pairs from scholarly articles via structured summaries"};
  app.require_subcommand(1);

  BuildDatasetOpts build_opts;
  auto* build = app.add_subcommand(
      "build-dataset", "Pair a KG snapshot with cleaned article texts into a dataset");
  add_common(build, build_opts.common);
  build->add_option("--snapshot", build_opts.snapshot, "KG snapshot (JSONL statements)");
  build->add_option("--texts", build_opts.texts, "Directory of per-paper article JSON");
  build->add_option("--out", build_opts.out_dir, "Output directory");
  build->add_option("--blocklist", build_opts.blocklist,
                    "Structural property label to drop (repeatable)");
  build->callback([&] { run_build_dataset(build_opts); });

  SplitOpts split_opts;
  auto* split = app.add_subcommand("split", "Deterministic 80-10-10 train/val/test split");
  add_common(split, split_opts.common);
  split->add_option("--dataset", split_opts.dataset, "Dataset JSONL to split");
  split->add_option("--out-prefix", split_opts.out_prefix,
                    "Prefix for .train/.val/.test.jsonl outputs");
  split->callback([&] { run_split(split_opts); });

  CleanOpts clean_opts;
  auto* clean = app.add_subcommand("clean", "Clean article text (sections, URLs, citations)");
  add_common(clean, clean_opts.common);
  clean->add_option("--texts", clean_opts.texts, "Directory of article JSON files");
  clean->add_option("--article", clean_opts.article, "Single article JSON file");
  clean->add_option("--out", clean_opts.out, "Output directory (--texts) or file (--article)");
  clean->callback([&] { run_clean(clean_opts); });

  TrainOpts train_opts;
  auto* train = app.add_subcommand("train", "Fine-tune the neural summarizer backend");
  add_common(train, train_opts.common);
  train->add_option("--train", train_opts.train, "Training split (JSONL)");
  train->add_option("--val", train_opts.val, "Validation split (JSONL)");
  train->add_option("--checkpoints", train_opts.checkpoints, "Checkpoint directory");
  train->add_option("--backend", train_opts.backend, "Summarizer backend (must be neural)");
  train->add_option("--max-epochs", train_opts.max_epochs, "Override config max_epochs");
  train->add_option("--batch-size", train_opts.batch_size, "Override config batch_size");
  train->callback([&] { run_train(train_opts); });

  PredictOpts predict_opts;
  auto* predict = app.add_subcommand("predict", "Generate structured summaries for a dataset");
  add_common(predict, predict_opts.common);
  predict->add_option("--input", predict_opts.input, "Dataset JSONL to summarize");
  predict->add_option("--out", predict_opts.out, "Predictions output (JSONL)");
  predict->add_option("--backend", predict_opts.backend, "neural | oracle | lead_baseline");
  predict->add_option("--train", predict_opts.train,
                      "Training split (lead_baseline property labels)");
  predict->add_option("--checkpoints", predict_opts.checkpoints, "Checkpoint directory (neural)");
  predict->callback([&] { run_predict(predict_opts); });

  ParseOpts parse_opts;
  auto* parse = app.add_subcommand("parse", "Parse predicted summaries into property-value pairs");
  add_common(parse, parse_opts.common);
  parse->add_option("--predictions", parse_opts.predictions, "Predictions JSONL");
  parse->add_option("--out", parse_opts.out, "Parsed output (JSONL)");
  auto* strict_flag =
      parse->add_flag("--strict", parse_opts.strict, "Fail on the first malformed segment");
  parse->add_flag("--tolerant", parse_opts.tolerant,
                  "Collect malformed segments instead of failing (default)")
      ->excludes(strict_flag);
  parse->callback([&] { run_parse(parse_opts); });

  LinkOpts link_opts;
  auto* link = app.add_subcommand("link", "Link parsed values to KG entities, emit statements");
  add_common(link, link_opts.common);
  link->add_option("--parsed", link_opts.parsed, "Parsed summaries (JSONL)");
  link->add_option("--catalog", link_opts.catalog, "Entity catalog (JSONL)");
  link->add_option("--out", link_opts.out, "Statements output");
  link->add_option("--format", link_opts.format, "jsonl | ntriples (default jsonl)");
  link->callback([&] { run_link(link_opts); });

  EvaluateOpts evaluate_opts;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold");
  add_common(evaluate, evaluate_opts.common);
  evaluate->add_option("--task", evaluate_opts.task, "summary | qa | ner (default summary)");
  evaluate->add_option("--predictions", evaluate_opts.predictions, "Predictions file");
  evaluate->add_option("--gold", evaluate_opts.gold, "Gold file (dataset / SQuAD / CoNLL)");
  evaluate->add_option("--report", evaluate_opts.report, "Write report JSON (+ Markdown) here");
  evaluate->callback([&] { run_evaluate(evaluate_opts); });

  ConvertOpts convert_qa_opts;
  auto* convert_qa =
      app.add_subcommand("convert-qa", "Reframe the dataset as extractive QA (SQuAD v2 JSON)");
  add_common(convert_qa, convert_qa_opts.common);
  convert_qa->add_option("--dataset", convert_qa_opts.dataset, "Dataset JSONL");
  convert_qa->add_option("--out", convert_qa_opts.out, "SQuAD-style JSON output");
  convert_qa->callback([&] { run_convert_qa(convert_qa_opts); });

  ConvertOpts convert_ner_opts;
  auto* convert_ner =
      app.add_subcommand("convert-ner", "Reframe the dataset as BIO-tagged NER (CoNLL)");
  add_common(convert_ner, convert_ner_opts.common);
  convert_ner->add_option("--dataset", convert_ner_opts.dataset, "Dataset JSONL");
  convert_ner->add_option("--out", convert_ner_opts.out, "CoNLL output");
  convert_ner->callback([&] { run_convert_ner(convert_ner_opts); });

  ReportOpts report_opts;
  auto* report = app.add_subcommand("report", "Re-render the Markdown view of a report JSON");
  add_common(report, report_opts.common);
  report->add_option("--in", report_opts.in, "Report JSON produced by evaluate");
  report->callback([&] { run_report(report_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: usage: " << e.what() << "\n";
    return 64;
  } catch (const morty::format_error& e) {
    std::cerr << "error: format: " << e.what() << "\n";
    return 65;
  } catch (const morty::config_error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 78;
  } catch (const morty::io_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 74;
  } catch (const morty::capability_error& e) {
    std::cerr << "error: capability: " << e.what() << "\n";
    return 69;
  } catch (const morty::error& e) {
    std::cerr << "error: pipeline: " << e.what() << "\n";
    return 70;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
