#pragma once

#include <string>

#include "mlq/ast.hpp"

namespace mlq {

// Canonical pretty-printer: 4-space indent, one declaration per line, fixed
// member order. print(parse(print(parse(text)))) == print(parse(text)).
std::string print_model(const ast::ModelUnit& model);

std::string print_expr(const ast::Expr& expr);

// Encodes a decoded string back to a quoted literal ("\n" and friends).
std::string quote_string(const std::string& value);

} // namespace mlq
