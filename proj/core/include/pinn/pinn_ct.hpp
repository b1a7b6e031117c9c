#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pinn/autodiff.hpp"
#include "pinn/loss.hpp"
#include "pinn/metrics_io.hpp"
#include "pinn/network.hpp"
#include "pinn/optimizer.hpp"
#include "pinn/sampler.hpp"

namespace pinn {

enum class CtEquation { kBurgers, kSchrodinger };
enum class CtBoundary { kDirichletData, kPeriodicWithDerivative };

/// A continuous-time collocation problem: a space-time box, a network
/// u_θ(t,x) (two components for the complex-valued equation), and the
/// equation whose residual is penalized at collocation points.
struct CtProblem {
  CtEquation equation = CtEquation::kBurgers;
  CtBoundary boundary = CtBoundary::kDirichletData;
  MLPConfig network;
  BoxDomain domain;  // {t, x}

  /// Viscous advection on t ∈ [0,1], x ∈ [−1,1], 8 tanh layers of width 20.
  static CtProblem burgers();
  /// Focusing cubic wave equation on t ∈ [0,π/2], x ∈ [−5,5], 4 tanh layers
  /// of width 100, two output components (real, imaginary).
  static CtProblem schrodinger();

  void validate() const;
};

/// Point sets consumed by ct_loss. Which fields are required depends on the
/// equation: the scalar problem uses {t_u, x_u, u} plus collocation
/// {t_f, x_f}; the complex problem uses the initial snapshot {x0, u0, v0},
/// boundary times {t_b}, and collocation {t_f, x_f}. Collocation may be
/// empty, in which case the loss degenerates to pure regression.
struct CtTrainingSet {
  std::vector<double> t_u, x_u, u;
  std::vector<double> t_f, x_f;
  std::vector<double> x0, u0, v0;
  std::vector<double> t_b;

  /// Shape and domain-containment checks; ArgumentError when a term the
  /// equation requires is empty or sizes disagree.
  void validate(const CtProblem& problem) const;
};

/// u_t + u·u_x − (0.01/π)·u_xx, the strong-form defect of the viscous
/// advection equation.
Variable burgers_residual(Variable u, Variable u_t, Variable u_x, Variable u_xx);

/// Residual pair (real, imaginary) of i·h_t + 0.5·h_xx + |h|²·h with
/// h = u + i·v: (−v_t + 0.5·u_xx + (u²+v²)·u, u_t + 0.5·v_xx + (u²+v²)·v).
std::pair<Variable, Variable> schrodinger_residual(Variable u, Variable v,
                                                   Variable u_t, Variable v_t,
                                                   Variable u_xx, Variable v_xx);

/// Reusable mean-square objective for one problem and training set. Graphs
/// are assembled once at construction; evaluations rebind parameters only.
class CtObjective {
 public:
  CtObjective(const CtProblem& problem, const CtTrainingSet& data);

  std::size_t parameter_count() const { return engine_.parameter_count(); }
  double evaluate(std::span<const double> params, std::span<double> grad) {
    return engine_.evaluate(params, grad);
  }
  /// Weighted values of the individual mean-square terms after the last
  /// evaluation, in assembly order (data/initial, boundary, collocation).
  std::span<const double> term_values() const { return engine_.block_values(); }
  Objective as_objective() { return engine_.as_objective(); }

 private:
  SumSquaresObjective engine_;
};

/// One-shot loss value and parameter gradient.
std::pair<double, std::vector<double>> ct_loss(const CtProblem& problem,
                                               std::span<const double> params,
                                               const CtTrainingSet& data);

struct CtTrainResult {
  std::vector<double> parameters;
  OptimizeReport report;
};

/// Seeded parameter initialization followed by full-batch minimization of
/// the ct objective. Deterministic given (seed, config).
CtTrainResult train_ct(const CtProblem& problem, const CtTrainingSet& data,
                       std::uint64_t seed, const LBFGSConfig& config);

/// Dense network evaluation on the tensor grid t_grid × x_grid. Components:
/// {"u"} for the scalar equation; {"u","v","habs"} for the complex one.
SolutionGrid predict_grid(const CtProblem& problem, std::span<const double> params,
                          std::vector<double> t_grid, std::vector<double> x_grid);

/// Training data for the viscous advection problem: n_u points split evenly
/// between the initial profile −sin(πx) and the homogeneous boundaries
/// (Gaussian noise of the given std added to the values), plus n_f
/// collocation points by Latin hypercube over the space-time box.
CtTrainingSet make_burgers_training_set(std::size_t n_u, std::size_t n_f,
                                        std::uint64_t seed, double noise_std = 0.0);

/// Training data for the focusing wave problem: n0 initial points with
/// h(0,x) = 2·sech(x), nb boundary times, n_f collocation points.
CtTrainingSet make_schrodinger_training_set(std::size_t n0, std::size_t nb,
                                            std::size_t nf, std::uint64_t seed);

}  // namespace pinn
