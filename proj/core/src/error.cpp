#include "tlpe/error.hpp"

namespace tlpe {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "syntax_error";
    case ErrorKind::UnknownDirective: return "unknown_directive";
    case ErrorKind::BadSpec: return "bad_spec";
    case ErrorKind::Permission: return "permission_error";
    case ErrorKind::Existence: return "existence_error";
    case ErrorKind::Instantiation: return "instantiation_error";
    case ErrorKind::Type: return "type_error";
    case ErrorKind::Evaluation: return "evaluation_error";
    case ErrorKind::Floundering: return "floundering";
    case ErrorKind::CutOverIncompleteTable: return "cut_over_incomplete_table";
    case ErrorKind::NotTabled: return "not_tabled";
    case ErrorKind::TableIncomplete: return "table_incomplete";
    case ErrorKind::TableAbsent: return "table_absent";
    case ErrorKind::Incremental: return "incremental_error";
    case ErrorKind::AnswerSubsumption: return "answer_subsumption_error";
    case ErrorKind::NestedIncomplete: return "nested_incomplete";
    case ErrorKind::Io: return "io_error";
    case ErrorKind::Interrupted: return "interrupted";
  }
  return "error";
}

}  // namespace tlpe
