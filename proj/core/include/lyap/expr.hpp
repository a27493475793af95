#pragma once

/**
 * @file expr.hpp
 * @brief Immutable expression DAG over + - * / with constants and variables.
 *
 * Builders fold constants only when the folded value is exact, so an
 * expression always describes the same real function as written.
 */

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace lyap {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Sqr };

class Expr {
 public:
  /// Constant expression.
  Expr(double c = 0.0);  // NOLINT(google-explicit-constructor)
  static Expr var(std::size_t index);

  Op op() const noexcept;
  double value() const noexcept;        // Const only
  std::size_t index() const noexcept;   // Var only
  const Expr& lhs() const;              // unary and binary ops
  const Expr& rhs() const;              // binary ops
  bool is_const() const noexcept { return op() == Op::Const; }
  bool is_const(double c) const noexcept { return is_const() && value() == c; }
  /// Identity of the underlying node (for memoization).
  const void* id() const noexcept { return node_.get(); }

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Op op, Expr a, Expr b);
  friend Expr make_node(Op op, Expr a);
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Op op;
  double c = 0.0;
  std::size_t index = 0;
  std::vector<Expr> args;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr sqr(const Expr& a);
Expr pow(const Expr& a, int n);

/// Symbolic partial derivatives d e_i / d x_j for all outputs, sharing
/// common subexpressions across entries. Result is row-major
/// (outputs.size() x num_vars).
std::vector<Expr> jacobian(const std::vector<Expr>& outputs, std::size_t num_vars);

/// Replaces variable k by subs[k].
Expr substitute(const Expr& e, const std::vector<Expr>& subs);

/// Infix rendering using the given variable names (x0, x1, ... by default).
std::string to_string(const Expr& e, const std::vector<std::string>& names = {});

}  // namespace lyap
