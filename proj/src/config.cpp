#include "morty/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "morty/types.hpp"

namespace morty::config {

using nlohmann::json;

namespace {

// Unknown keys are rejected so config typos fail loudly instead of
// silently keeping a default.
void check_keys(const json& object, const std::set<std::string>& known,
                const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (!known.contains(key))
      throw config_error(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_field(const json& object, const char* key, T& out, const std::string& where) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(where + ": bad value for '" + std::string(key) + "': " + e.what());
  }
}

void read_path(const json& object, const char* key, std::filesystem::path& out,
               const std::string& where) {
  std::string value;
  read_field(object, key, value, where);
  if (!value.empty()) out = value;
}

void parse_paths(const json& object, PipelinePaths& paths, const std::string& where) {
  check_keys(object, {"snapshot", "texts", "dataset_dir", "catalog", "checkpoints", "reports"},
             where);
  read_path(object, "snapshot", paths.snapshot, where);
  read_path(object, "texts", paths.texts, where);
  read_path(object, "dataset_dir", paths.dataset_dir, where);
  read_path(object, "catalog", paths.catalog, where);
  read_path(object, "checkpoints", paths.checkpoints, where);
  read_path(object, "reports", paths.reports, where);
}

void parse_cleaning(const json& object, text_cleaner::CleaningConfig& cleaning,
                    const std::string& where) {
  check_keys(object, {"removed_sections", "strip_urls", "ascii_only", "strip_citations"}, where);
  if (object.contains("removed_sections")) {
    std::vector<std::string> sections;
    read_field(object, "removed_sections", sections, where);
    // The cleaner looks sections up by normalized label, so normalize
    // here: a config listing "References" must match like "references".
    cleaning.removed_sections.clear();
    for (const auto& section : sections) {
      cleaning.removed_sections.insert(text_cleaner::normalize_section_label(section));
    }
  }
  read_field(object, "strip_urls", cleaning.strip_urls, where);
  read_field(object, "ascii_only", cleaning.ascii_only, where);
  read_field(object, "strip_citations", cleaning.strip_citations, where);
}

void parse_summarizer(const json& object, summarizer::SummarizerConfig& config,
                      const std::string& where) {
  check_keys(object,
             {"backend", "max_input_tokens", "batch_size", "max_epochs", "early_stopping",
              "checkpoint_dir", "seed", "beam_size", "max_output_tokens", "python",
              "backend_script"},
             where);
  if (object.contains("backend")) {
    std::string backend;
    read_field(object, "backend", backend, where);
    config.backend = summarizer::backend_kind_from_string(backend);
  }
  read_field(object, "max_input_tokens", config.max_input_tokens, where);
  read_field(object, "batch_size", config.batch_size, where);
  read_field(object, "max_epochs", config.max_epochs, where);
  if (object.contains("early_stopping")) {
    const json& es = object.at("early_stopping");
    const std::string es_where = where + ".early_stopping";
    if (!es.is_object()) throw config_error(es_where + ": expected an object");
    check_keys(es, {"enabled", "patience"}, es_where);
    read_field(es, "enabled", config.early_stopping.enabled, es_where);
    read_field(es, "patience", config.early_stopping.patience, es_where);
  }
  read_path(object, "checkpoint_dir", config.checkpoint_dir, where);
  read_field(object, "seed", config.seed, where);
  read_field(object, "beam_size", config.beam_size, where);
  read_field(object, "max_output_tokens", config.max_output_tokens, where);
  read_field(object, "python", config.python, where);
  read_path(object, "backend_script", config.backend_script, where);
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& where) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(where + ": invalid JSON: " + e.what());
  }
  if (!parsed.is_object()) throw config_error(where + ": expected a JSON object");
  check_keys(parsed, {"seed", "paths", "cleaning", "summarizer", "property_blocklist"}, where);

  PipelineConfig config;
  read_field(parsed, "seed", config.seed, where);
  if (parsed.contains("paths")) {
    if (!parsed.at("paths").is_object()) throw config_error(where + ".paths: expected an object");
    parse_paths(parsed.at("paths"), config.paths, where + ".paths");
  }
  if (parsed.contains("cleaning")) {
    if (!parsed.at("cleaning").is_object())
      throw config_error(where + ".cleaning: expected an object");
    parse_cleaning(parsed.at("cleaning"), config.cleaning, where + ".cleaning");
  }
  const bool summarizer_sets_seed =
      parsed.contains("summarizer") && parsed.at("summarizer").is_object() &&
      parsed.at("summarizer").contains("seed");
  if (parsed.contains("summarizer")) {
    if (!parsed.at("summarizer").is_object())
      throw config_error(where + ".summarizer: expected an object");
    parse_summarizer(parsed.at("summarizer"), config.summarizer, where + ".summarizer");
  }
  read_field(parsed, "property_blocklist", config.property_blocklist, where);

  if (!summarizer_sets_seed) config.summarizer.seed = config.seed;
  if (config.summarizer.checkpoint_dir.empty())
    config.summarizer.checkpoint_dir = config.paths.checkpoints;
  config.summarizer.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, path.string());
}

}  // namespace morty::config
