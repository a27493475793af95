#pragma once

/**
 * @file tape.hpp
 * @brief Linearized expression DAG with common-subexpression elimination.
 *
 * One tape serves point, interval, first-order jet and Taylor-series
 * evaluation. Variable i always occupies slot i.
 */

#include <cstdint>
#include <vector>

#include "lyap/expr.hpp"
#include "lyap/interval.hpp"

namespace lyap {

enum class TapeOp : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Sqr,
  AddC,   // a + c
  RSubC,  // c - a
  MulC,   // c * a
  DivC,   // a / c
  RDivC,  // c / a
};

struct Instr {
  TapeOp op;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double c = 0.0;
};

inline double sqr(double x) { return x * x; }

class Tape {
 public:
  Tape() = default;
  Tape(const std::vector<Expr>& outputs, std::size_t num_vars);

  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  std::size_t num_slots() const noexcept { return code_.size(); }
  const std::vector<Instr>& code() const noexcept { return code_; }
  const std::vector<std::uint32_t>& outputs() const noexcept { return outputs_; }
  /// True if the slot does not depend on any variable.
  bool is_constant(std::size_t slot) const { return constant_[slot] != 0; }
  /// Bit j set if the slot depends on variable j (all bits if n > 64).
  std::uint64_t dependencies(std::size_t slot) const { return deps_[slot]; }

  /// Evaluates all outputs; work is resized as needed.
  template <class T>
  void eval(const T* x, T* out, std::vector<T>& work) const;

  template <class T>
  std::vector<T> eval(const std::vector<T>& x) const {
    std::vector<T> work, out(num_outputs());
    eval(x.data(), out.data(), work);
    return out;
  }

  /// Forward-mode first-order jets: values (num_outputs) and Jacobian
  /// (num_outputs x num_vars, row-major).
  template <class T>
  void eval_jacobian(const T* x, T* values, T* jac) const;

 private:
  std::size_t num_vars_ = 0;
  std::vector<Instr> code_;
  std::vector<std::uint32_t> outputs_;
  std::vector<std::uint8_t> constant_;
  std::vector<std::uint64_t> deps_;
};

template <class T>
void Tape::eval(const T* x, T* out, std::vector<T>& w) const {
  w.resize(code_.size());
  for (std::size_t s = 0; s < code_.size(); ++s) {
    const Instr& in = code_[s];
    switch (in.op) {
      case TapeOp::Const: w[s] = T(in.c); break;
      case TapeOp::Var: w[s] = x[in.a]; break;
      case TapeOp::Add: w[s] = w[in.a] + w[in.b]; break;
      case TapeOp::Sub: w[s] = w[in.a] - w[in.b]; break;
      case TapeOp::Mul: w[s] = w[in.a] * w[in.b]; break;
      case TapeOp::Div: w[s] = w[in.a] / w[in.b]; break;
      case TapeOp::Neg: w[s] = -w[in.a]; break;
      case TapeOp::Sqr: w[s] = sqr(w[in.a]); break;
      case TapeOp::AddC: w[s] = w[in.a] + T(in.c); break;
      case TapeOp::RSubC: w[s] = T(in.c) - w[in.a]; break;
      case TapeOp::MulC: w[s] = w[in.a] * in.c; break;
      case TapeOp::DivC: w[s] = w[in.a] / T(in.c); break;
      case TapeOp::RDivC: w[s] = T(in.c) / w[in.a]; break;
    }
  }
  for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = w[outputs_[i]];
}

template <class T>
void Tape::eval_jacobian(const T* x, T* values, T* jac) const {
  const std::size_t n = num_vars_;
  const std::size_t ns = code_.size();
  std::vector<T> v(ns), d(ns * n, T(0.0));
  auto dep = [&](std::size_t s, std::size_t j) {
    return j >= 64 || ((deps_[s] >> j) & 1u);
  };
  for (std::size_t s = 0; s < ns; ++s) {
    const Instr& in = code_[s];
    T* ds = &d[s * n];
    const T* da = &d[in.a * n];
    const T* db = &d[in.b * n];
    switch (in.op) {
      case TapeOp::Const: v[s] = T(in.c); break;
      case TapeOp::Var:
        v[s] = x[in.a];
        ds[in.a] = T(1.0);
        break;
      case TapeOp::Add:
        v[s] = v[in.a] + v[in.b];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j] + db[j];
        break;
      case TapeOp::Sub:
        v[s] = v[in.a] - v[in.b];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j] - db[j];
        break;
      case TapeOp::Mul:
        v[s] = v[in.a] * v[in.b];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j] * v[in.b] + v[in.a] * db[j];
        break;
      case TapeOp::Div: {
        v[s] = v[in.a] / v[in.b];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = (da[j] - v[s] * db[j]) / v[in.b];
        break;
      }
      case TapeOp::Neg:
        v[s] = -v[in.a];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = -da[j];
        break;
      case TapeOp::Sqr:
        v[s] = sqr(v[in.a]);
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = (v[in.a] * da[j]) * 2.0;
        break;
      case TapeOp::AddC:
        v[s] = v[in.a] + T(in.c);
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j];
        break;
      case TapeOp::RSubC:
        v[s] = T(in.c) - v[in.a];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = -da[j];
        break;
      case TapeOp::MulC:
        v[s] = v[in.a] * in.c;
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j] * in.c;
        break;
      case TapeOp::DivC:
        v[s] = v[in.a] / T(in.c);
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = da[j] / T(in.c);
        break;
      case TapeOp::RDivC:
        v[s] = T(in.c) / v[in.a];
        for (std::size_t j = 0; j < n; ++j)
          if (dep(s, j)) ds[j] = -(v[s] * da[j]) / v[in.a];
        break;
    }
  }
  for (std::size_t i = 0; i < outputs_.size(); ++i) {
    std::uint32_t s = outputs_[i];
    values[i] = v[s];
    for (std::size_t j = 0; j < n; ++j) jac[i * n + j] = d[s * n + j];
  }
}

/**
 * Taylor-series (automatic differentiation in time) evaluator over a tape.
 * Coefficients are computed order by order; coefficient k of every slot
 * needs coefficients <= k of the variables.
 */
template <class T>
class TaylorEvaluator {
 public:
  TaylorEvaluator(const Tape& tape, int max_order)
      : tape_(&tape), stride_(static_cast<std::size_t>(max_order) + 1),
        c_(tape.num_slots() * stride_, T(0.0)) {}

  int max_order() const noexcept { return static_cast<int>(stride_) - 1; }

  void set_var(std::size_t i, int k, const T& value) { at(i, k) = value; }

  /// Computes coefficient k of every slot.
  void compute(int k);

  const T& output(std::size_t j, int k) const { return at(tape_->outputs()[j], k); }
  const T& slot(std::size_t s, int k) const { return at(s, k); }

 private:
  T& at(std::size_t s, int k) { return c_[s * stride_ + static_cast<std::size_t>(k)]; }
  const T& at(std::size_t s, int k) const { return c_[s * stride_ + static_cast<std::size_t>(k)]; }

  const Tape* tape_;
  std::size_t stride_;
  std::vector<T> c_;
};

template <class T>
void TaylorEvaluator<T>::compute(int k) {
  const auto& code = tape_->code();
  for (std::size_t s = 0; s < code.size(); ++s) {
    const Instr& in = code[s];
    if (in.op == TapeOp::Var) continue;
    if (tape_->is_constant(s)) {
      if (k > 0) {
        at(s, k) = T(0.0);
        continue;
      }
    }
    const std::size_t a = in.a, b = in.b;
    switch (in.op) {
      case TapeOp::Const: at(s, k) = T(in.c); break;
      case TapeOp::Var: break;
      case TapeOp::Add: at(s, k) = at(a, k) + at(b, k); break;
      case TapeOp::Sub: at(s, k) = at(a, k) - at(b, k); break;
      case TapeOp::Neg: at(s, k) = -at(a, k); break;
      case TapeOp::AddC: at(s, k) = k == 0 ? at(a, 0) + T(in.c) : at(a, k); break;
      case TapeOp::RSubC: at(s, k) = k == 0 ? T(in.c) - at(a, 0) : -at(a, k); break;
      case TapeOp::MulC: at(s, k) = at(a, k) * in.c; break;
      case TapeOp::DivC: at(s, k) = at(a, k) / T(in.c); break;
      case TapeOp::Mul: {
        if (tape_->is_constant(a)) {
          at(s, k) = at(a, 0) * at(b, k);
        } else if (tape_->is_constant(b)) {
          at(s, k) = at(a, k) * at(b, 0);
        } else {
          T acc = at(a, 0) * at(b, k);
          for (int j = 1; j <= k; ++j) acc = acc + at(a, j) * at(b, k - j);
          at(s, k) = acc;
        }
        break;
      }
      case TapeOp::Sqr: {
        T acc(0.0);
        for (int j = 0; j < (k + 1) / 2; ++j) acc = acc + at(a, j) * at(a, k - j);
        acc = acc * 2.0;
        if (k % 2 == 0) acc = acc + sqr(at(a, k / 2));
        at(s, k) = acc;
        break;
      }
      case TapeOp::Div: {
        if (tape_->is_constant(b)) {
          at(s, k) = at(a, k) / at(b, 0);
        } else {
          T acc = at(a, k);
          for (int j = 0; j < k; ++j) acc = acc - at(s, j) * at(b, k - j);
          at(s, k) = acc / at(b, 0);
        }
        break;
      }
      case TapeOp::RDivC: {
        if (k == 0) {
          at(s, 0) = T(in.c) / at(a, 0);
        } else {
          T acc(0.0);
          for (int j = 0; j < k; ++j) acc = acc + at(s, j) * at(a, k - j);
          at(s, k) = -acc / at(a, 0);
        }
        break;
      }
    }
  }
}

}  // namespace lyap
