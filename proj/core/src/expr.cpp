#include "lyap/expr.hpp"

#include <unordered_map>

#include <fmt/format.h>

#include "lyap/errors.hpp"
#include "lyap/interval.hpp"

namespace lyap {

namespace {

std::shared_ptr<const Expr::Node> const_node(double c) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Const;
  n->c = c;
  return n;
}

// Folds a constant operation when the interval result is a single float.
bool fold(Op op, double a, double b, double& out) {
  try {
    Interval r;
    switch (op) {
      case Op::Add: r = Interval(a) + Interval(b); break;
      case Op::Sub: r = Interval(a) - Interval(b); break;
      case Op::Mul: r = Interval(a) * Interval(b); break;
      case Op::Div:
        if (b == 0.0) return false;
        r = Interval(a) / Interval(b);
        break;
      case Op::Sqr: r = sqr(Interval(a)); break;
      default: return false;
    }
    if (!r.is_point()) return false;
    out = r.lo();
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

Expr::Expr(double c) : node_(const_node(c)) {}

Expr Expr::var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = index;
  return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->c; }
std::size_t Expr::index() const noexcept { return node_->index; }

const Expr& Expr::lhs() const {
  if (node_->args.empty()) throw UsageError("Expr::lhs on a leaf");
  return node_->args[0];
}

const Expr& Expr::rhs() const {
  if (node_->args.size() < 2) throw UsageError("Expr::rhs on a non-binary node");
  return node_->args[1];
}

Expr make_node(Op op, Expr a, Expr b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return Expr(std::move(n));
}

Expr make_node(Op op, Expr a) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->args = {std::move(a)};
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  double c;
  if (a.is_const() && b.is_const() && fold(Op::Add, a.value(), b.value(), c)) return Expr(c);
  return make_node(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  double c;
  if (a.is_const() && b.is_const() && fold(Op::Sub, a.value(), b.value(), c)) return Expr(c);
  return make_node(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const(0.0) || b.is_const(0.0)) return Expr(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  double c;
  if (a.is_const() && b.is_const() && fold(Op::Mul, a.value(), b.value(), c)) return Expr(c);
  if (a.id() == b.id()) return sqr(a);
  return make_node(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_const(1.0)) return a;
  if (a.is_const(0.0) && !b.is_const(0.0)) return Expr(0.0);
  double c;
  if (a.is_const() && b.is_const() && fold(Op::Div, a.value(), b.value(), c)) return Expr(c);
  return make_node(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_const()) return Expr(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return make_node(Op::Neg, a);
}

Expr sqr(const Expr& a) {
  double c;
  if (a.is_const() && fold(Op::Sqr, a.value(), 0.0, c)) return Expr(c);
  if (a.op() == Op::Neg) return sqr(a.lhs());
  return make_node(Op::Sqr, a);
}

Expr pow(const Expr& a, int n) {
  if (n < 0) return Expr(1.0) / pow(a, -n);
  if (n == 0) return Expr(1.0);
  if (n == 1) return a;
  Expr h = pow(a, n / 2);
  Expr s = sqr(h);
  return (n % 2) ? s * a : s;
}

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::size_t var) : var_(var) {}

  Expr d(const Expr& e) {
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::Const: return Expr(0.0);
      case Op::Var: return Expr(e.index() == var_ ? 1.0 : 0.0);
      case Op::Add: return d(e.lhs()) + d(e.rhs());
      case Op::Sub: return d(e.lhs()) - d(e.rhs());
      case Op::Neg: return -d(e.lhs());
      case Op::Mul: return d(e.lhs()) * e.rhs() + e.lhs() * d(e.rhs());
      case Op::Div: {
        Expr db = d(e.rhs());
        Expr da = d(e.lhs());
        if (db.is_const(0.0)) return da / e.rhs();
        return (da - e * db) / e.rhs();
      }
      case Op::Sqr: {
        Expr da = d(e.lhs());
        if (da.is_const(0.0)) return Expr(0.0);
        return Expr(2.0) * (e.lhs() * da);
      }
    }
    throw UsageError("unknown expression op");
  }

  std::size_t var_;
  std::unordered_map<const void*, Expr> memo_;
};

class Substituter {
 public:
  explicit Substituter(const std::vector<Expr>& subs) : subs_(subs) {}

  Expr s(const Expr& e) {
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::Const: return e;
      case Op::Var:
        if (e.index() >= subs_.size()) throw UsageError("substitute: variable index out of range");
        return subs_[e.index()];
      case Op::Add: return s(e.lhs()) + s(e.rhs());
      case Op::Sub: return s(e.lhs()) - s(e.rhs());
      case Op::Neg: return -s(e.lhs());
      case Op::Mul: return s(e.lhs()) * s(e.rhs());
      case Op::Div: return s(e.lhs()) / s(e.rhs());
      case Op::Sqr: return sqr(s(e.lhs()));
    }
    throw UsageError("unknown expression op");
  }

  const std::vector<Expr>& subs_;
  std::unordered_map<const void*, Expr> memo_;
};

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    default: return 4;
  }
}

std::string render(const Expr& e, const std::vector<std::string>& names) {
  auto wrap = [&](const Expr& child, int min_prec) {
    std::string s = render(child, names);
    if (precedence(child.op()) < min_prec || (child.is_const() && child.value() < 0))
      return "(" + s + ")";
    return s;
  };
  switch (e.op()) {
    case Op::Const: return fmt::format("{}", e.value());
    case Op::Var:
      return e.index() < names.size() ? names[e.index()] : fmt::format("x{}", e.index());
    case Op::Add: return wrap(e.lhs(), 1) + " + " + wrap(e.rhs(), 2);
    case Op::Sub: return wrap(e.lhs(), 1) + " - " + wrap(e.rhs(), 2);
    case Op::Mul: return wrap(e.lhs(), 2) + "*" + wrap(e.rhs(), 3);
    case Op::Div: return wrap(e.lhs(), 2) + "/" + wrap(e.rhs(), 3);
    case Op::Neg: return "-" + wrap(e.lhs(), 3);
    case Op::Sqr: return wrap(e.lhs(), 4) + "^2";
  }
  return "?";
}

}  // namespace

std::vector<Expr> jacobian(const std::vector<Expr>& outputs, std::size_t num_vars) {
  std::vector<Expr> out(outputs.size() * num_vars);
  for (std::size_t j = 0; j < num_vars; ++j) {
    Differentiator d(j);
    for (std::size_t i = 0; i < outputs.size(); ++i) out[i * num_vars + j] = d.d(outputs[i]);
  }
  return out;
}

Expr substitute(const Expr& e, const std::vector<Expr>& subs) { return Substituter(subs).s(e); }

std::string to_string(const Expr& e, const std::vector<std::string>& names) { return render(e, names); }

}  // namespace lyap
