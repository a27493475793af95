#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lyap/expr.hpp"
#include "lyap/interval.hpp"
#include "lyap/tape.hpp"

namespace lyap {

using ParamMap = std::map<std::string, double>;

/// Expression-defined function R^n -> R^n shared by flows and maps.
class ExprSystem {
 public:
  ExprSystem() = default;
  ExprSystem(std::string name, std::vector<std::string> variables, std::vector<Expr> components,
             ParamMap parameters = {});

  const std::string& name() const { return impl_->name; }
  std::size_t dimension() const { return impl_->variables.size(); }
  const std::vector<std::string>& variables() const { return impl_->variables; }
  const ParamMap& parameters() const { return impl_->parameters; }
  const std::vector<Expr>& components() const { return impl_->components; }
  /// Symbolic Jacobian entries, row-major.
  const std::vector<Expr>& jacobian_exprs() const { return impl_->jacobian; }

  /// Tape with the n components as outputs.
  const Tape& tape() const { return impl_->tape; }
  /// Tape with outputs (components, Jacobian row-major): n + n^2 outputs.
  const Tape& tape_with_jacobian() const { return impl_->full_tape; }

  Vec operator()(const Vec& x) const;
  IntervalVector operator()(const IntervalVector& x) const;
  Mat jacobian(const Vec& x) const;
  IntervalMatrix jacobian(const IntervalVector& x) const;

 protected:
  struct Impl {
    std::string name;
    std::vector<std::string> variables;
    ParamMap parameters;
    std::vector<Expr> components;
    std::vector<Expr> jacobian;
    Tape tape;
    Tape full_tape;
    mutable std::mutex cache_mutex;
    mutable std::shared_ptr<const Impl> variational_cache;
  };
  std::shared_ptr<const Impl> impl_;

  explicit ExprSystem(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  void check_dim(std::size_t n) const;
};

/// Right-hand side of an autonomous ODE x' = f(x).
class VectorField : public ExprSystem {
 public:
  using ExprSystem::ExprSystem;

  /// The coupled (n + n^2)-dimensional system (x, V) with V' = Df(x) V;
  /// V is stored row-major after x.
  VectorField variational() const;

 private:
  explicit VectorField(std::shared_ptr<const Impl> impl) : ExprSystem(std::move(impl)) {}
};

/// Discrete-time map x -> psi(x).
class SmoothMap : public ExprSystem {
 public:
  using ExprSystem::ExprSystem;
};

IntervalVector eval_f(const ExprSystem& f, const IntervalVector& x);
IntervalMatrix eval_Df(const ExprSystem& f, const IntervalVector& x);

/// Time-Taylor coefficients x_0 .. x_p of the solution through x.
std::vector<IntervalVector> taylor_coeffs(const VectorField& f, const IntervalVector& x, int order);
std::vector<Vec> taylor_coeffs(const VectorField& f, const Vec& x, int order);

/// Builtin vector fields: fitzhugh_nagumo, rossler, rossler_printed,
/// lorenz_sinai_vul, linear_diag, cubic_1d, planar_limit_cycle,
/// harmonic_oscillator. Missing or unknown parameters raise UsageError.
VectorField builtin(const std::string& name, const ParamMap& params);
/// Builtin maps: square_1d, linear_diag_map, henon.
SmoothMap builtin_map(const std::string& name, const ParamMap& params);

/// Reference parameter values for a builtin (empty for parameter-free ones).
ParamMap default_parameters(const std::string& name);
std::vector<std::string> builtin_names();
std::vector<std::string> builtin_map_names();

}  // namespace lyap
