#pragma once

#include <stdexcept>
#include <string>

#include "disti/lang.hpp"

namespace disti {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col);
  int line, col;
};

struct ParsedProgram {
  ProgramP program;
  TableEnvP env;  // tables declared in the header lines
};

// Text format: optional `table1 name = [..]` / `table2 name = [[..],..]`
// declarations, then one program. `#` starts a comment. See README for the
// grammar. Throws ParseError with line/column on bad input, on probability
// literals outside [0,1], and on references to undeclared tables.
ParsedProgram parse_program(const std::string& source);

// Entry points for fragments (used by the assertion format and the CLI).
ExprP parse_expr(const std::string& source);
PredP parse_pred(const std::string& source);

}  // namespace disti
