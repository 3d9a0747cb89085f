#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ergoinv {

// Compiled arithmetic expression over named variables.
//
// Grammar: numbers, variables, constants `pi` and `e`, binary + - * / ^
// (right-associative power), unary minus, parentheses and the functions
// sqrt exp log sin cos tan tanh atan abs.
class Expression {
public:
  Expression() = default;
  // Throws Error(ErrorKind::config) with the offending column on syntax errors
  // or unknown identifiers.
  static Expression compile(std::string_view text, const std::vector<std::string>& variables);

  double operator()(std::span<const double> vars) const;
  const std::string& text() const noexcept { return text_; }
  bool valid() const noexcept { return root_ != nullptr; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

// Variables for a d-dimensional point: {"x"} when d == 1 (also accepting x1),
// else {"x1", ..., "xd"}.
std::vector<std::string> coordinate_names(std::size_t d);

// Splits "a; b; c" at the given separator, trimming whitespace.
std::vector<std::string> split_list(std::string_view text, char sep);

}  // namespace ergoinv
