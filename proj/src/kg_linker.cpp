#include "morty/kg_linker.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "morty/strings.hpp"

namespace morty::kg_linker {

namespace strings = morty::strings;
using nlohmann::json;

EntityCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open entity catalog: " + path.string());

  EntityCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strings::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);

    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw format_error(where + ": malformed catalog line: " + e.what());
    }
    if (!entry.is_object() || !entry.contains("entity_id") || !entry.contains("label") ||
        !entry["entity_id"].is_string() || !entry["label"].is_string()) {
      throw format_error(where + ": catalog entry needs string fields entity_id, label");
    }
    const std::string entity_id = entry["entity_id"].get<std::string>();
    const std::string key = strings::normalize_key(entry["label"].get<std::string>());
    if (entity_id.empty()) throw format_error(where + ": empty entity_id");
    if (key.empty()) throw format_error(where + ": empty label");

    auto [it, inserted] = catalog.entries.emplace(key, entity_id);
    if (!inserted) {
      catalog.warnings.push_back(where + ": duplicate label '" + key + "' ignored (kept " +
                                 it->second + ")");
    }
  }
  return catalog;
}

std::vector<Statement> link(const summary_codec::StructuredSummary& summary,
                            const std::string& paper_id, const EntityCatalog& catalog) {
  std::vector<Statement> statements;
  for (const auto& pair : summary.pairs) {
    for (const auto& value : pair.values) {
      auto it = catalog.entries.find(strings::normalize_key(value));
      if (it != catalog.entries.end()) {
        statements.push_back(Statement{paper_id, pair.property_label, ObjectKind::entity, it->second});
      } else {
        statements.push_back(Statement{paper_id, pair.property_label, ObjectKind::literal, value});
      }
    }
  }
  return statements;
}

namespace {

bool is_unreserved(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '.' || c == '_' || c == '~';
}

std::string percent_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (is_unreserved(c)) {
      out.push_back(c);
    } else {
      const auto b = static_cast<unsigned char>(c);
      out.push_back('%');
      out.push_back(hex[b >> 4]);
      out.push_back(hex[b & 0xF]);
    }
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(const std::string& s, const std::string& where) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) throw format_error(where + ": truncated percent escape");
    const int hi = hex_value(s[i + 1]);
    const int lo = hex_value(s[i + 2]);
    if (hi < 0 || lo < 0) throw format_error(where + ": bad percent escape");
    out.push_back(static_cast<char>((hi << 4) | lo));
    i += 2;
  }
  return out;
}

std::string escape_literal(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const char* kind_to_string(ObjectKind kind) {
  return kind == ObjectKind::entity ? "entity" : "literal";
}

ObjectKind kind_from_string(const std::string& s, const std::string& where) {
  if (s == "entity") return ObjectKind::entity;
  if (s == "literal") return ObjectKind::literal;
  throw format_error(where + ": unknown object_kind '" + s + "'");
}

// Reads an `<angle:bracketed>` term with the given prefix, advancing pos.
std::string read_angle_term(const std::string& line, std::size_t& pos, const std::string& prefix,
                            const std::string& where) {
  if (line.compare(pos, prefix.size(), prefix) != 0) {
    throw format_error(where + ": expected '" + prefix + "'");
  }
  pos += prefix.size();
  const auto end = line.find('>', pos);
  if (end == std::string::npos) throw format_error(where + ": unterminated term");
  std::string term = line.substr(pos, end - pos);
  pos = end + 1;
  return percent_decode(term, where);
}

}  // namespace

void emit_statements(const std::vector<Statement>& statements, const std::filesystem::path& path,
                     StatementFormat format) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write statements file: " + path.string());

  for (const auto& statement : statements) {
    if (format == StatementFormat::jsonl) {
      out << json{{"subject", statement.subject},
                  {"predicate", statement.predicate},
                  {"object_kind", kind_to_string(statement.object_kind)},
                  {"object", statement.object}}
                 .dump()
          << "\n";
    } else {
      out << "<paper:" << percent_encode(statement.subject) << "> <prop:"
          << percent_encode(statement.predicate) << "> ";
      if (statement.object_kind == ObjectKind::entity) {
        out << "<entity:" << percent_encode(statement.object) << ">";
      } else {
        out << '"' << escape_literal(statement.object) << '"';
      }
      out << " .\n";
    }
  }
}

std::vector<Statement> read_statements(const std::filesystem::path& path, StatementFormat format) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open statements file: " + path.string());

  std::vector<Statement> statements;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strings::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);

    if (format == StatementFormat::jsonl) {
      json entry;
      try {
        entry = json::parse(line);
      } catch (const json::exception& e) {
        throw format_error(where + ": malformed statement line: " + e.what());
      }
      try {
        statements.push_back(Statement{entry.at("subject").get<std::string>(),
                                       entry.at("predicate").get<std::string>(),
                                       kind_from_string(entry.at("object_kind").get<std::string>(), where),
                                       entry.at("object").get<std::string>()});
      } catch (const json::exception& e) {
        throw format_error(where + ": statement missing fields: " + e.what());
      }
      continue;
    }

    Statement statement;
    std::size_t pos = 0;
    statement.subject = read_angle_term(line, pos, "<paper:", where);
    if (pos >= line.size() || line[pos] != ' ') throw format_error(where + ": expected space");
    ++pos;
    statement.predicate = read_angle_term(line, pos, "<prop:", where);
    if (pos >= line.size() || line[pos] != ' ') throw format_error(where + ": expected space");
    ++pos;

    if (strings::starts_with(std::string_view(line).substr(pos), "<entity:")) {
      statement.object_kind = ObjectKind::entity;
      statement.object = read_angle_term(line, pos, "<entity:", where);
    } else if (pos < line.size() && line[pos] == '"') {
      statement.object_kind = ObjectKind::literal;
      ++pos;
      std::string value;
      bool closed = false;
      while (pos < line.size()) {
        const char c = line[pos];
        if (c == '\\') {
          if (pos + 1 >= line.size()) throw format_error(where + ": truncated escape");
          const char esc = line[pos + 1];
          switch (esc) {
            case '"': value.push_back('"'); break;
            case '\\': value.push_back('\\'); break;
            case 'n': value.push_back('\n'); break;
            case 'r': value.push_back('\r'); break;
            case 't': value.push_back('\t'); break;
            default: throw format_error(where + ": bad escape '\\" + std::string(1, esc) + "'");
          }
          pos += 2;
          continue;
        }
        if (c == '"') {
          closed = true;
          ++pos;
          break;
        }
        value.push_back(c);
        ++pos;
      }
      if (!closed) throw format_error(where + ": unterminated literal");
      statement.object = value;
    } else {
      throw format_error(where + ": expected '<entity:' or quoted literal");
    }

    if (strings::trim(line.substr(pos)) != ".") throw format_error(where + ": expected trailing '.'");
    statements.push_back(std::move(statement));
  }
  return statements;
}

}  // namespace morty::kg_linker
