#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morty/types.hpp"

// Uniform interface over structured-summary generators: a fine-tunable
// neural sequence-to-sequence backend (an external PyTorch process
// driven over file contracts, so the rest of the pipeline builds and
// tests with no ML runtime), a gold oracle, and a lead-sentence
// extractive floor.
namespace morty::summarizer {

enum class BackendKind { neural, oracle, lead_baseline };

const char* to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& s);

struct EarlyStopping {
  bool enabled = true;
  int patience = 3;  // epochs without validation-loss improvement
};

struct SummarizerConfig {
  BackendKind backend = BackendKind::neural;
  std::size_t max_input_tokens = 4096;
  std::size_t batch_size = 2;
  std::size_t max_epochs = 20;
  EarlyStopping early_stopping;
  std::filesystem::path checkpoint_dir;
  std::uint64_t seed = 0;
  // Decoding defaults.
  std::size_t beam_size = 4;
  std::size_t max_output_tokens = 512;
  // Neural bridge: interpreter and training script. Empty means
  // "resolve": $MORTY_PYTHON / python3, and $MORTY_BACKEND_SCRIPT /
  // seq2seq_backend.py next to the executable / tools/seq2seq_backend.py.
  std::string python;
  std::filesystem::path backend_script;

  void validate() const;  // throws config_error on bad field values
};

// Keeps the first max_input_tokens whitespace tokens, rejoined with
// single spaces; shorter inputs pass through unchanged.
std::string truncate_input(const std::string& text, std::size_t max_input_tokens);

struct TrainingLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  // gold is required by the oracle backend and ignored by the others.
  virtual std::string generate(const std::string& text,
                               const AnnotationRecord* gold = nullptr) const = 0;
  virtual BackendKind kind() const = 0;
};

// Emits serialize(gold) verbatim; the upper bound every other backend
// chases.
class OracleSummarizer final : public Summarizer {
 public:
  std::string generate(const std::string& text, const AnnotationRecord* gold) const override;
  BackendKind kind() const override { return BackendKind::oracle; }
};

// Pairs every property label seen in training with the first sentence of
// the input; a deliberately weak extractive floor.
class LeadBaselineSummarizer final : public Summarizer {
 public:
  explicit LeadBaselineSummarizer(std::vector<std::string> property_labels);
  static LeadBaselineSummarizer from_training(const std::vector<TrainingExample>& train);

  std::string generate(const std::string& text, const AnnotationRecord* gold) const override;
  BackendKind kind() const override { return BackendKind::lead_baseline; }

  const std::vector<std::string>& property_labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
};

// Everything through the first '.', '!' or '?', trimmed; the whole
// trimmed text when no terminator exists.
std::string first_sentence(const std::string& text);

// A fitted neural model: config + checkpoint directory + training log.
class NeuralSummarizer final : public Summarizer {
 public:
  // Opens an already-fitted checkpoint directory.
  static NeuralSummarizer open(SummarizerConfig config);

  std::string generate(const std::string& text, const AnnotationRecord* gold) const override;
  BackendKind kind() const override { return BackendKind::neural; }

  // One backend invocation for a whole batch; use this for prediction
  // runs (per-call generate pays the interpreter startup every time).
  std::vector<Prediction> generate_batch(
      const std::vector<std::pair<std::string, std::string>>& id_texts) const;

  const std::vector<TrainingLogEntry>& training_log() const { return training_log_; }
  const SummarizerConfig& config() const { return config_; }

 private:
  friend NeuralSummarizer fit(const std::vector<TrainingExample>&,
                              const std::vector<TrainingExample>&, const SummarizerConfig&);
  explicit NeuralSummarizer(SummarizerConfig config) : config_(std::move(config)) {}

  SummarizerConfig config_;
  std::vector<TrainingLogEntry> training_log_;
};

// True iff the configured interpreter can import the ML runtime and the
// backend script exists.
bool neural_runtime_available(const SummarizerConfig& config);

// Fine-tunes the neural backend on (truncated input -> target summary)
// pairs. Stops early when validation loss fails to improve for
// `patience` consecutive epochs and restores the best-validation
// checkpoint. Throws capability_error when the backend is not neural or
// the ML runtime is unavailable, std::invalid_argument on an empty train
// set.
NeuralSummarizer fit(const std::vector<TrainingExample>& train,
                     const std::vector<TrainingExample>& validation,
                     const SummarizerConfig& config);

// Convenience factory for the pure backends (throws for neural; use
// fit/open).
std::unique_ptr<Summarizer> make_baseline(BackendKind kind,
                                          const std::vector<TrainingExample>& train = {});

}  // namespace morty::summarizer
