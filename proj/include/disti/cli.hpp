#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace disti {

// Exit codes are a stable contract:
//   0 success / check passed      1 check failed (witness in the report)
//   2 parse error                 3 expression evaluation fault
//   4 program is not a single top-level loop (reach, loop check modes)
//   5 total-correctness mode without --assume-ast
//   6 replay bit source exhausted
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disti
