#pragma once

#include <string>
#include <string_view>

#include "sbst/ast.hpp"

namespace sbst::lang {

// Parses and type-checks MiniLang source. Throws SyntaxError, TypeError or
// DuplicateMethod. `name` becomes Program::name.
Program parse(std::string_view source, std::string name = "subject");

Program parse_file(const std::string& path);

}  // namespace sbst::lang
