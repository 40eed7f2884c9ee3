#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "morty/summarizer.hpp"
#include "morty/text_cleaner.hpp"

// Pipeline-wide configuration: one JSON file shared by every CLI
// subcommand, with flags overriding individual fields.
namespace morty::config {

struct PipelinePaths {
  std::filesystem::path snapshot;     // KG snapshot (JSONL statements)
  std::filesystem::path texts;        // directory of per-paper article JSON
  std::filesystem::path dataset_dir;  // dataset / split outputs
  std::filesystem::path catalog;      // entity catalog (JSONL)
  std::filesystem::path checkpoints;  // model checkpoint directory
  std::filesystem::path reports;      // evaluation report directory
};

struct PipelineConfig {
  PipelinePaths paths;
  text_cleaner::CleaningConfig cleaning;
  summarizer::SummarizerConfig summarizer;
  std::vector<std::string> property_blocklist;  // structural properties to drop
  std::uint64_t seed = 0;
};

// Parses the documented JSON config format. Every key is optional;
// unknown keys raise config_error (they are almost always typos). The
// top-level seed becomes the summarizer seed unless the summarizer block
// sets its own.
PipelineConfig load_config(const std::filesystem::path& path);

// The same parse applied to an in-memory document (used by load_config
// and the tests).
PipelineConfig parse_config(const std::string& text, const std::string& where);

}  // namespace morty::config
