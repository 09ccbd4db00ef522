#ifndef HMIN_TOOLS_EXPRESSION_HPP
#define HMIN_TOOLS_EXPRESSION_HPP

#include <memory>
#include <stdexcept>
#include <string>

#include "hmin/grid.hpp"

namespace hmin::cli {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Arithmetic in x1, x2: + - * / ^, parentheses, numbers, pi, and the functions
/// sin cos tan exp log sqrt abs tanh cosh sinh sign.
class Expression {
 public:
  explicit Expression(const std::string& text);
  double operator()(Point x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace hmin::cli

#endif  // HMIN_TOOLS_EXPRESSION_HPP
