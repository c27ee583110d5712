#pragma once

#include <string_view>

#include "idss/sql/ast.hpp"

namespace idss::sql {

// Parses one SELECT statement (optional trailing ';'). Keywords are
// case-insensitive. Throws SyntaxError with position info, or
// UnsupportedFeature for recognized SQL outside the subset.
Ast parse(std::string_view sql);

}  // namespace idss::sql
