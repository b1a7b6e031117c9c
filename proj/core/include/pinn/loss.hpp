#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pinn/autodiff.hpp"
#include "pinn/batch_eval.hpp"
#include "pinn/optimizer.hpp"

namespace pinn {

/// One weighted sum-of-squares block of an objective:
///
///   weight · Σ_points Σ_k (output_k(point) − target_k(point))²
///
/// with weight = 1/n_points when `mean` is set and 1 otherwise. The block
/// owns its computation graph; `params` lists the graph's parameter
/// variables in flat order (the same order across blocks, so gradients can
/// be summed positionally).
struct SquaredBlock {
  std::unique_ptr<Graph> graph;
  std::vector<Variable> params;
  std::vector<Variable> point_inputs;
  std::vector<Variable> outputs;
  /// coords[i][p]: value of point_inputs[i] at point p.
  std::vector<std::vector<double>> coords;
  /// targets[k][p]: target of output k at point p. An empty inner vector
  /// stands for all-zero targets.
  std::vector<std::vector<double>> targets;
  bool mean = false;

  std::size_t points() const { return coords.empty() ? 0 : coords[0].size(); }
  /// Structural checks; throws ArgumentError on shape mismatch or an empty
  /// block, StructuralError if params don't match `parameter_count`.
  void validate(std::size_t parameter_count) const;
};

/// Deterministic full-batch objective over a list of blocks. Each evaluation
/// binds the parameter vector into every block's graph, streams the block's
/// points through a lane-parallel evaluator in a fixed order, and reduces
/// value and gradient in that same order, so results are reproducible bit
/// for bit.
class SumSquaresObjective {
 public:
  explicit SumSquaresObjective(std::vector<SquaredBlock> blocks);

  std::size_t parameter_count() const { return n_params_; }
  std::size_t block_count() const { return blocks_.size(); }

  /// Objective value at x; when grad is non-empty (length parameter_count())
  /// it receives the gradient.
  double evaluate(std::span<const double> x, std::span<double> grad);

  /// Per-block weighted values from the most recent evaluate().
  std::span<const double> block_values() const { return block_values_; }

  /// Adapter for the optimizer.
  Objective as_objective();

 private:
  std::vector<SquaredBlock> blocks_;
  std::vector<BatchEvaluator> evals_;
  std::vector<std::vector<std::uint32_t>> param_nodes_;  // per block
  std::vector<double> block_values_;
  std::vector<double> adjoints_;  // scratch
  std::size_t n_params_ = 0;
};

}  // namespace pinn
