#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "morty/summary_codec.hpp"
#include "morty/types.hpp"

// Interlinks parsed summary values to knowledge-graph entities by exact
// lookup (after trim / whitespace-collapse / ASCII case-fold — never
// fuzzy), and emits statements for ingestion.
namespace morty::kg_linker {

struct EntityCatalog {
  // normalized label -> entity_id
  std::unordered_map<std::string, std::string> entries;
  std::vector<std::string> warnings;  // duplicate-label collisions

  std::size_t size() const { return entries.size(); }
};

// JSON Lines {"entity_id", "label"}. First entry wins on label
// collision; the collision is recorded as a warning. Malformed lines
// throw format_error with the line number. An empty file is a valid
// empty catalog.
EntityCatalog load_catalog(const std::filesystem::path& path);

enum class ObjectKind { entity, literal };

struct Statement {
  std::string subject;    // paper_id
  std::string predicate;  // property_label
  ObjectKind object_kind = ObjectKind::literal;
  std::string object;     // entity_id or literal value

  bool operator==(const Statement&) const = default;
};

// One statement per (property, value) in summary order: the entity
// variant when the normalized value is a catalog key, the literal
// variant otherwise (unlinked values are kept, not dropped).
std::vector<Statement> link(const summary_codec::StructuredSummary& summary,
                            const std::string& paper_id, const EntityCatalog& catalog);

enum class StatementFormat { jsonl, ntriples_like };

// jsonl: one {"subject","predicate","object_kind","object"} per line.
// ntriples_like: `<paper:ID> <prop:LABEL> <entity:EID> .` or
// `<paper:ID> <prop:LABEL> "literal" .`, with IDs and labels
// percent-encoded. Both re-parse via read_statements.
void emit_statements(const std::vector<Statement>& statements, const std::filesystem::path& path,
                     StatementFormat format);

std::vector<Statement> read_statements(const std::filesystem::path& path, StatementFormat format);

}  // namespace morty::kg_linker
