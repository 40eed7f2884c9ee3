#include "morty/summarizer.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "morty/dataset_io.hpp"
#include "morty/strings.hpp"
#include "morty/summary_codec.hpp"

namespace morty::summarizer {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::neural: return "neural";
    case BackendKind::oracle: return "oracle";
    case BackendKind::lead_baseline: return "lead_baseline";
  }
  throw error("unknown backend kind");
}

BackendKind backend_kind_from_string(const std::string& s) {
  if (s == "neural") return BackendKind::neural;
  if (s == "oracle") return BackendKind::oracle;
  if (s == "lead-baseline" || s == "lead_baseline") return BackendKind::lead_baseline;
  throw config_error("unknown summarizer backend '" + s +
                     "' (expected neural, oracle or lead_baseline)");
}

void SummarizerConfig::validate() const {
  if (max_input_tokens == 0) throw config_error("max_input_tokens must be positive");
  if (batch_size == 0) throw config_error("batch_size must be positive");
  if (max_epochs == 0) throw config_error("max_epochs must be positive");
  if (beam_size == 0) throw config_error("beam_size must be positive");
  if (max_output_tokens == 0) throw config_error("max_output_tokens must be positive");
  if (early_stopping.enabled && early_stopping.patience < 1)
    throw config_error("early_stopping.patience must be >= 1 when enabled");
}

std::string truncate_input(const std::string& text, std::size_t max_input_tokens) {
  std::vector<std::string> tokens = strings::split_whitespace(text);
  if (tokens.size() > max_input_tokens) tokens.resize(max_input_tokens);
  return strings::join(tokens, " ");
}

// --- oracle ---------------------------------------------------------------

std::string OracleSummarizer::generate(const std::string&, const AnnotationRecord* gold) const {
  if (gold == nullptr) throw error("oracle backend requires a gold annotation record");
  return summary_codec::serialize(*gold);
}

// --- lead baseline ----------------------------------------------------------

std::string first_sentence(const std::string& text) {
  const std::string trimmed = strings::normalize_whitespace(text);
  const std::size_t end = trimmed.find_first_of(".!?");
  if (end == std::string::npos) return trimmed;
  return strings::trim(trimmed.substr(0, end + 1));
}

LeadBaselineSummarizer::LeadBaselineSummarizer(std::vector<std::string> property_labels)
    : labels_(std::move(property_labels)) {}

LeadBaselineSummarizer LeadBaselineSummarizer::from_training(
    const std::vector<TrainingExample>& train) {
  std::vector<std::string> labels;
  for (const TrainingExample& example : train) {
    const summary_codec::StructuredSummary parsed = summary_codec::parse(example.target_summary);
    for (const PropertyValuePair& pair : parsed.pairs) {
      bool seen = false;
      for (const std::string& label : labels)
        if (label == pair.property_label) { seen = true; break; }
      if (!seen) labels.push_back(pair.property_label);
    }
  }
  return LeadBaselineSummarizer(std::move(labels));
}

std::string LeadBaselineSummarizer::generate(const std::string& text,
                                             const AnnotationRecord*) const {
  const std::string sentence = first_sentence(text);
  if (sentence.empty() || labels_.empty()) return "";
  std::vector<PropertyValuePair> pairs;
  pairs.reserve(labels_.size());
  for (const std::string& label : labels_) pairs.push_back({label, {sentence}});
  return summary_codec::serialize_pairs(pairs);
}

// --- neural bridge ----------------------------------------------------------

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  out += "'";
  return out;
}

// Runs a shell command, returning the child's exit status.
int run_command(const std::string& command) {
  const int rc = std::system(command.c_str());  // NOLINT: fixed binary, quoted args
  if (rc == -1) throw io_error("failed to launch subprocess: " + command);
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return 128;  // terminated by signal
}

std::string resolve_python(const SummarizerConfig& config) {
  if (const char* env = std::getenv("MORTY_PYTHON"); env != nullptr && *env != '\0')
    return env;
  if (!config.python.empty()) return config.python;
  return "python3";
}

fs::path executable_dir() {
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return {};
  return exe.parent_path();
}

fs::path resolve_backend_script(const SummarizerConfig& config) {
  if (const char* env = std::getenv("MORTY_BACKEND_SCRIPT"); env != nullptr && *env != '\0') {
    const fs::path p = env;
    if (!fs::exists(p))
      throw config_error("MORTY_BACKEND_SCRIPT points at a missing file: " + p.string());
    return p;
  }
  if (!config.backend_script.empty()) {
    if (!fs::exists(config.backend_script))
      throw config_error("backend script not found: " + config.backend_script.string());
    return config.backend_script;
  }
  const fs::path exe_dir = executable_dir();
  if (!exe_dir.empty() && fs::exists(exe_dir / "seq2seq_backend.py"))
    return exe_dir / "seq2seq_backend.py";
  if (fs::exists("tools/seq2seq_backend.py")) return "tools/seq2seq_backend.py";
  throw capability_error(
      "neural backend script seq2seq_backend.py not found "
      "(set MORTY_BACKEND_SCRIPT or SummarizerConfig::backend_script)");
}

std::vector<TrainingLogEntry> read_training_log(const fs::path& checkpoint_dir) {
  const fs::path path = checkpoint_dir / "training_log.json";
  std::ifstream in(path);
  if (!in) throw io_error("cannot open training log: " + path.string());
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  if (!parsed.is_array()) throw format_error(path.string() + ": expected a JSON array");
  std::vector<TrainingLogEntry> log;
  for (const json& row : parsed) {
    TrainingLogEntry entry;
    entry.epoch = row.at("epoch").get<int>();
    entry.train_loss = row.at("train_loss").get<double>();
    entry.validation_loss = row.at("validation_loss").get<double>();
    log.push_back(entry);
  }
  return log;
}

std::vector<TrainingExample> truncate_examples(const std::vector<TrainingExample>& examples,
                                               std::size_t max_input_tokens) {
  std::vector<TrainingExample> out = examples;
  for (TrainingExample& example : out) {
    example.input_text = truncate_input(example.input_text, max_input_tokens);
    example.input_token_count = strings::count_tokens(example.input_text);
  }
  return out;
}

}  // namespace

bool neural_runtime_available(const SummarizerConfig& config) {
  fs::path script;
  try {
    script = resolve_backend_script(config);
  } catch (const error&) {
    return false;
  }
  const std::string probe = resolve_python(config) +
                            " -c 'import torch' >/dev/null 2>&1";
  try {
    return run_command(probe) == 0;
  } catch (const io_error&) {
    return false;
  }
}

NeuralSummarizer NeuralSummarizer::open(SummarizerConfig config) {
  config.validate();
  if (config.checkpoint_dir.empty())
    throw config_error("neural backend requires a checkpoint directory");
  if (!fs::exists(config.checkpoint_dir / "model.pt"))
    throw io_error("no fitted model at " + (config.checkpoint_dir / "model.pt").string());
  NeuralSummarizer model(std::move(config));
  model.training_log_ = read_training_log(model.config_.checkpoint_dir);
  return model;
}

std::vector<Prediction> NeuralSummarizer::generate_batch(
    const std::vector<std::pair<std::string, std::string>>& id_texts) const {
  if (id_texts.empty()) return {};
  if (!neural_runtime_available(config_))
    throw capability_error("neural backend unavailable: ML runtime import failed");

  const fs::path input_path = config_.checkpoint_dir / "generate_input.jsonl";
  const fs::path output_path = config_.checkpoint_dir / "generate_output.jsonl";
  {
    std::ofstream out(input_path);
    if (!out) throw io_error("cannot write " + input_path.string());
    for (const auto& [paper_id, text] : id_texts) {
      const json row = {{"paper_id", paper_id},
                        {"input_text", truncate_input(text, config_.max_input_tokens)}};
      out << row.dump() << '\n';
    }
  }

  std::ostringstream cmd;
  cmd << shell_quote(resolve_python(config_)) << ' '
      << shell_quote(resolve_backend_script(config_).string()) << " generate"
      << " --checkpoint-dir " << shell_quote(config_.checkpoint_dir.string())
      << " --input " << shell_quote(input_path.string())
      << " --output " << shell_quote(output_path.string())
      << " --beam-size " << config_.beam_size
      << " --max-output-tokens " << config_.max_output_tokens;
  const int status = run_command(cmd.str());
  if (status != 0)
    throw error("neural backend generate exited with status " + std::to_string(status));

  std::vector<Prediction> predictions = dataset_io::read_predictions_jsonl(output_path);
  if (predictions.size() != id_texts.size())
    throw format_error("backend returned " + std::to_string(predictions.size()) +
                       " predictions for " + std::to_string(id_texts.size()) + " inputs");
  return predictions;
}

std::string NeuralSummarizer::generate(const std::string& text, const AnnotationRecord*) const {
  const std::vector<Prediction> out = generate_batch({{"single", text}});
  return out.front().prediction;
}

NeuralSummarizer fit(const std::vector<TrainingExample>& train,
                     const std::vector<TrainingExample>& validation,
                     const SummarizerConfig& config) {
  config.validate();
  if (config.backend != BackendKind::neural)
    throw capability_error(std::string("fit() requires the neural backend, got ") +
                           to_string(config.backend));
  if (train.empty()) throw std::invalid_argument("fit: training set is empty");
  if (config.checkpoint_dir.empty())
    throw config_error("neural backend requires a checkpoint directory");
  if (!neural_runtime_available(config))
    throw capability_error("neural backend unavailable: ML runtime import failed");

  std::error_code ec;
  fs::create_directories(config.checkpoint_dir, ec);
  if (ec)
    throw io_error("cannot create checkpoint directory " + config.checkpoint_dir.string() +
                   ": " + ec.message());

  const fs::path train_path = config.checkpoint_dir / "fit_train.jsonl";
  const fs::path val_path = config.checkpoint_dir / "fit_val.jsonl";
  dataset_io::write_dataset_jsonl(train_path,
                                  truncate_examples(train, config.max_input_tokens));
  dataset_io::write_dataset_jsonl(val_path,
                                  truncate_examples(validation, config.max_input_tokens));

  std::ostringstream cmd;
  cmd << shell_quote(resolve_python(config)) << ' '
      << shell_quote(resolve_backend_script(config).string()) << " fit"
      << " --checkpoint-dir " << shell_quote(config.checkpoint_dir.string())
      << " --train " << shell_quote(train_path.string())
      << " --val " << shell_quote(val_path.string())
      << " --batch-size " << config.batch_size
      << " --max-epochs " << config.max_epochs
      << " --patience " << (config.early_stopping.enabled ? config.early_stopping.patience : 0)
      << " --seed " << config.seed;
  const int status = run_command(cmd.str());
  if (status != 0)
    throw error("neural backend fit exited with status " + std::to_string(status));

  NeuralSummarizer model(config);
  model.training_log_ = read_training_log(config.checkpoint_dir);
  if (model.training_log_.empty())
    throw format_error("backend produced an empty training log");
  return model;
}

std::unique_ptr<Summarizer> make_baseline(BackendKind kind,
                                          const std::vector<TrainingExample>& train) {
  switch (kind) {
    case BackendKind::oracle:
      return std::make_unique<OracleSummarizer>();
    case BackendKind::lead_baseline:
      return std::make_unique<LeadBaselineSummarizer>(
          LeadBaselineSummarizer::from_training(train));
    case BackendKind::neural:
      throw config_error("neural backend is constructed via fit() or NeuralSummarizer::open()");
  }
  throw error("unknown backend kind");
}

}  // namespace morty::summarizer
