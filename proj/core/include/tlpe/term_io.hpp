#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tlpe/term.hpp"

namespace tlpe {

// Canonical rendering: functional notation except for lists, atoms quoted
// only when needed, variables as _N unless names are supplied.
std::string format_term(const Term& t, const std::vector<std::string>* var_names = nullptr);
std::string format_atom(std::string_view name);
std::string format_decimal(int64_t scaled);

struct ReadTerm {
  Term term;
  std::vector<std::string> var_names;  // indexed by variable id; "_" for anonymous
  int line = 0;
  int column = 0;
};

// Reads period-terminated terms using the fixed operator table (no user
// operators). Throws SyntaxError with line/column.
std::vector<ReadTerm> read_terms(std::string_view text);
// Reads exactly one term; the final period is optional.
ReadTerm read_term(std::string_view text);

}  // namespace tlpe
