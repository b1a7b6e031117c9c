#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

/// Elementary operations of the scalar computation graph.
enum class Op : std::uint8_t {
  kConst,
  kInput,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPowInt,  // integer exponent in Node::aux
  kTanh,
  kSin,
  kCos,
  kExp,
  kSqrt,
  kAbs2,  // abs2(a, b) = a² + b², the squared modulus of a complex pair
  kFma,   // fma(a, b, c) = a·b + c
};

struct Node {
  Op op = Op::kConst;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;   // third operand (kFma only)
  std::int32_t aux = 0;  // integer exponent (kPowInt only)
};

class Graph;

/// Handle to one scalar node of a Graph. Cheap to copy. A Variable is valid
/// only against the graph that created it.
class Variable {
 public:
  Variable() = default;

  Graph* graph() const { return graph_; }
  std::uint32_t index() const { return index_; }
  double value() const;

 private:
  friend class Graph;
  Variable(Graph* graph, std::uint32_t index) : graph_(graph), index_(index) {}

  Graph* graph_ = nullptr;
  std::uint32_t index_ = 0;
};

/// Append-only scalar computation graph with reverse- and forward-mode
/// differentiation whose outputs are themselves graph nodes, so derivatives
/// can be differentiated again (u_xx, and parameter gradients of losses that
/// contain u_xx).
///
/// Node values are evaluated eagerly as nodes are built and can be refreshed
/// after rebinding free variables with forward(). Single-threaded by
/// contract; independent graphs may be used from different threads.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // ---- construction -------------------------------------------------------

  /// Constant node. Constants of equal bit pattern are pooled.
  Variable constant(double value);
  /// Free variable, initially unbound (forward() rejects the graph until a
  /// value is bound).
  Variable input();
  /// Free variable bound to an initial value.
  Variable input(double value);

  Variable add(Variable a, Variable b);
  Variable sub(Variable a, Variable b);
  Variable mul(Variable a, Variable b);
  Variable div(Variable a, Variable b);
  Variable neg(Variable a);
  Variable pow_int(Variable base, int exponent);
  Variable tanh(Variable a);
  Variable sin(Variable a);
  Variable cos(Variable a);
  Variable exp(Variable a);
  Variable sqrt(Variable a);
  /// Squared modulus of a complex pair: re² + im².
  Variable abs2(Variable re, Variable im);
  /// Fused a·b + c.
  Variable fma(Variable a, Variable b, Variable c);

  // ---- evaluation ---------------------------------------------------------

  /// Rebinds one free variable (no propagation until forward()).
  void bind(Variable input, double value);
  /// Recomputes every node value in topological order.
  /// Throws StructuralError if any free variable is unbound.
  void forward();
  /// bind() for every pair, then forward().
  void eval(std::span<const std::pair<Variable, double>> bindings);

  double value(Variable v) const;

  // ---- differentiation ----------------------------------------------------

  /// Reverse-mode derivatives ∂output/∂wrt_k, appended to this graph as new
  /// nodes (so they can be differentiated again). Variables in wrt must be
  /// free-variable nodes. A wrt that does not influence output yields a
  /// constant-zero node. Values of the returned nodes are already consistent
  /// with the current bindings.
  std::vector<Variable> grad(Variable output, std::span<const Variable> wrt);
  std::vector<Variable> grad(Variable output, std::initializer_list<Variable> wrt) {
    return grad(output, std::span<const Variable>(wrt.begin(), wrt.size()));
  }

  /// Forward-mode directional derivatives d(output_k)/d(wrt) for every output
  /// in one pass, appended as new nodes. Complements grad(): cheaper when many
  /// outputs are differentiated with respect to one variable.
  std::vector<Variable> tangents(std::span<const Variable> outputs, Variable wrt);
  std::vector<Variable> tangents(std::initializer_list<Variable> outputs, Variable wrt) {
    return tangents(std::span<const Variable>(outputs.begin(), outputs.size()), wrt);
  }

  /// Value-mode reverse sweep (no new nodes): accumulates ∂(Σ seedₖ·outputₖ)/∂node
  /// for every node into `adjoints` (size() entries, zero-initialized by the
  /// call). Used by training loops where the derivative itself need not be
  /// differentiated again.
  void backward(std::span<const Variable> outputs, std::span<const double> seeds,
                std::vector<double>& adjoints) const;

  // ---- introspection ------------------------------------------------------

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  /// Free-variable registry in creation order.
  const std::vector<std::uint32_t>& inputs() const { return inputs_; }

 private:
  friend class BatchEvaluator;

  Variable push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                std::int32_t aux);
  double compute(const Node& node) const;
  std::uint32_t require(Variable v) const;
  Variable at(std::uint32_t index) { return Variable(this, index); }

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::uint32_t> inputs_;
  std::vector<std::uint8_t> input_bound_;  // parallel to inputs_
  std::unordered_map<std::uint64_t, std::uint32_t> constant_pool_;
};

// Operator sugar so residual builders read like the mathematics.
Variable operator+(Variable a, Variable b);
Variable operator-(Variable a, Variable b);
Variable operator*(Variable a, Variable b);
Variable operator/(Variable a, Variable b);
Variable operator-(Variable a);
Variable operator+(double a, Variable b);
Variable operator+(Variable a, double b);
Variable operator-(double a, Variable b);
Variable operator-(Variable a, double b);
Variable operator*(double a, Variable b);
Variable operator*(Variable a, double b);
Variable operator/(double a, Variable b);
Variable operator/(Variable a, double b);

}  // namespace pinn
