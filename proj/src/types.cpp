#include "morty/types.hpp"

namespace morty {

const char* to_string(NonProseKind kind) {
  switch (kind) {
    case NonProseKind::table:
      return "table";
    case NonProseKind::figure:
      return "figure";
    case NonProseKind::footnote:
      return "footnote";
  }
  return "table";
}

NonProseKind non_prose_kind_from_string(const std::string& s) {
  if (s == "table") return NonProseKind::table;
  if (s == "figure") return NonProseKind::figure;
  if (s == "footnote") return NonProseKind::footnote;
  throw format_error("unknown non-prose kind: '" + s + "'");
}

}  // namespace morty
