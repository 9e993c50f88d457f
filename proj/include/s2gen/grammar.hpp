#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "s2gen/expr.hpp"

namespace s2gen {

/// Grammar (one expression per line, single spaces around operators):
///
///   expr   := atom | "(" expr " " BINOP " " expr ")" | UNARY "(" expr ")"
///           | "(" expr ")**2" | "(" expr ")**3"
///   atom   := NUMBER | "x" INT
///   BINOP  := "add" | "sub" | "mul"
///   UNARY  := "inv" | "abs" | "sqrt" | "sin" | "cos" | "tan" | "arctan" | "log" | "exp"
///
/// Affine(a, b, e) prints as "(b add (a mul e))". When parsing, that shape is
/// folded back into an Affine node if `e` is a variable or a unary operator,
/// which is exactly where the sampler places affine wrappers.
class ParseError : public std::runtime_error {
public:
    enum class Kind { syntax, unknown_identifier, bad_variable };

    ParseError(Kind kind, std::size_t offset, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Shortest decimal that round-trips the double.
std::string format_number(double value);
std::string to_text(const Number& number);
std::string to_text(const Expr& expr);

/// Throws ParseError. Leading and trailing whitespace is ignored.
Expr parse_text(std::string_view text);

}  // namespace s2gen
