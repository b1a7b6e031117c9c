#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinn/autodiff.hpp"

namespace pinn {

/// Lane-parallel executor for a compiled computation graph.
///
/// The graph is split at construction into a scalar part (nodes depending
/// only on constants and broadcast inputs, e.g. network parameters) and a
/// vector part (nodes depending on per-point inputs, e.g. collocation
/// coordinates). Vector nodes are evaluated for kLanes points at a time in a
/// flat lane workspace; scalar nodes are evaluated once per parameter update
/// and broadcast.
///
/// Usage per objective evaluation:
///   1. bind new parameter values in the graph, then refresh_scalars()
///   2. zero_scalar_accum()
///   3. per chunk of kLanes points: forward_chunk(), read output lanes,
///      backward_chunk() with per-lane seeds
///   4. finish_backward(adjoints) and read parameter adjoints
///
/// Partial chunks must be padded by the caller with a copy of any valid
/// point; zero seeds make the padded lanes contribute exactly zero.
///
/// The graph must not grow while an evaluator compiled from it is in use.
class BatchEvaluator {
 public:
  static constexpr int kLanes = 8;

  /// Compiles `graph`, treating `lane_inputs` (free-variable nodes) as
  /// per-point inputs and every other free variable as broadcast scalar.
  BatchEvaluator(Graph& graph, std::span<const Variable> lane_inputs);

  /// Re-evaluates scalar nodes from the graph's current bindings and
  /// refreshes broadcast operands. Call after parameter values change.
  void refresh_scalars();

  /// Evaluates all vector nodes for one chunk. `coords` holds one row of
  /// kLanes values per lane input, in lane_inputs order (row-major).
  void forward_chunk(const double* coords);

  /// Lane values of a node after forward_chunk(). Scalar nodes broadcast.
  double lane_value(Variable v, int lane) const;

  /// Reverse sweep over the vector part for one chunk. `seeds` holds kLanes
  /// adjoint seeds per output (row-major, matching forward_chunk lanes).
  /// Contributions crossing into the scalar part accumulate into an internal
  /// buffer; call finish_backward() after the last chunk.
  void backward_chunk(std::span<const Variable> outputs, const double* seeds);

  void zero_scalar_accum();

  /// Completes the reverse sweep through the scalar part of the graph.
  /// `adjoints` is resized to graph size; entries at free-variable node
  /// indices hold the objective gradient with respect to those variables.
  void finish_backward(std::vector<double>& adjoints) const;

  std::size_t vector_node_count() const { return n_slots_; }
  bool is_vector(Variable v) const;

 private:
  struct Instr {
    Op op;
    std::uint8_t mask;  // bit i set: operand i is a vector slot
    std::int32_t aux;
    std::uint32_t dst;           // slot
    std::uint32_t a, b, c;       // slot if vector operand, else unused
    std::uint32_t na, nb, nc;    // graph node ids of scalar operands
    double ia, ib, ic;           // broadcast values of scalar operands
  };

  void fetch(const Instr& ins, double* a, double* b, double* c) const;

  Graph* graph_;
  std::size_t compiled_size_;
  std::vector<std::uint8_t> vector_;        // node -> is vector
  std::vector<std::uint32_t> slot_;         // node -> slot or kNoSlot
  std::vector<std::uint32_t> scalar_eval_;  // scalar non-leaf nodes, ascending
  std::vector<std::uint32_t> lane_input_nodes_;
  std::vector<Instr> program_;
  std::size_t n_slots_ = 0;
  std::vector<double> ws_;            // slot lanes (values)
  std::vector<double> adj_;           // slot lanes (adjoints)
  std::vector<double> scalar_accum_;  // node -> summed adjoint from lanes
};

}  // namespace pinn
