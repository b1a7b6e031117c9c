#include "pinn/loss.hpp"

#include <algorithm>
#include <cstring>

#include "pinn/errors.hpp"
#include "pinn/network.hpp"

namespace pinn {

void SquaredBlock::validate(std::size_t parameter_count) const {
  if (!graph) throw ArgumentError("block has no graph");
  if (params.size() != parameter_count)
    throw StructuralError("block parameter list does not match the objective");
  if (point_inputs.empty()) throw ArgumentError("block has no point inputs");
  if (outputs.empty()) throw ArgumentError("block has no outputs");
  if (coords.size() != point_inputs.size())
    throw ArgumentError("one coordinate column required per point input");
  const std::size_t n = points();
  if (n == 0) throw ArgumentError("block has no points");
  for (const auto& column : coords)
    if (column.size() != n)
      throw ArgumentError("coordinate columns must have equal length");
  if (targets.size() != outputs.size())
    throw ArgumentError("one target column required per output");
  for (const auto& column : targets)
    if (!column.empty() && column.size() != n)
      throw ArgumentError("target columns must match the point count");
}

SumSquaresObjective::SumSquaresObjective(std::vector<SquaredBlock> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ArgumentError("objective needs at least one block");
  n_params_ = blocks_.front().params.size();
  evals_.reserve(blocks_.size());
  param_nodes_.reserve(blocks_.size());
  for (auto& block : blocks_) {
    block.validate(n_params_);
    evals_.emplace_back(*block.graph, block.point_inputs);
    auto& nodes = param_nodes_.emplace_back();
    nodes.reserve(block.params.size());
    for (Variable p : block.params) nodes.push_back(p.index());
  }
  block_values_.assign(blocks_.size(), 0.0);
}

double SumSquaresObjective::evaluate(std::span<const double> x,
                                     std::span<double> grad) {
  if (x.size() != n_params_)
    throw ArgumentError("parameter vector has the wrong length");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != n_params_)
    throw ArgumentError("gradient span has the wrong length");
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  constexpr int kLanes = BatchEvaluator::kLanes;
  double total = 0.0;
  for (std::size_t g = 0; g < blocks_.size(); ++g) {
    SquaredBlock& block = blocks_[g];
    BatchEvaluator& eval = evals_[g];
    bind_params(*block.graph, block.params, x);
    eval.refresh_scalars();
    if (want_grad) eval.zero_scalar_accum();

    const std::size_t n = block.points();
    const std::size_t n_in = block.point_inputs.size();
    const std::size_t n_out = block.outputs.size();
    const double weight = block.mean ? 1.0 / static_cast<double>(n) : 1.0;

    std::vector<double> chunk(n_in * kLanes);
    std::vector<double> seeds(n_out * kLanes);
    double sum = 0.0;
    for (std::size_t base = 0; base < n; base += kLanes) {
      const int live = static_cast<int>(std::min<std::size_t>(kLanes, n - base));
      for (std::size_t i = 0; i < n_in; ++i) {
        double* row = chunk.data() + i * kLanes;
        const double* column = block.coords[i].data() + base;
        for (int l = 0; l < kLanes; ++l)
          row[l] = column[l < live ? l : 0];  // pad with the first live point
      }
      eval.forward_chunk(chunk.data());
      for (std::size_t k = 0; k < n_out; ++k) {
        const std::vector<double>& target = block.targets[k];
        for (int l = 0; l < live; ++l) {
          const double r = eval.lane_value(block.outputs[k], l) -
                           (target.empty() ? 0.0 : target[base + l]);
          sum += r * r;
          seeds[k * kLanes + l] = 2.0 * weight * r;
        }
        for (int l = live; l < kLanes; ++l) seeds[k * kLanes + l] = 0.0;
      }
      if (want_grad) eval.backward_chunk(block.outputs, seeds.data());
    }
    block_values_[g] = weight * sum;
    total += block_values_[g];

    if (want_grad) {
      eval.finish_backward(adjoints_);
      const auto& nodes = param_nodes_[g];
      for (std::size_t p = 0; p < n_params_; ++p) grad[p] += adjoints_[nodes[p]];
    }
  }
  return total;
}

Objective SumSquaresObjective::as_objective() {
  return [this](std::span<const double> x, std::span<double> grad) {
    return evaluate(x, grad);
  };
}

}  // namespace pinn
