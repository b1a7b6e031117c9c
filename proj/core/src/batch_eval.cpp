#include "pinn/batch_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace pinn {

namespace {

constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();
constexpr int kL = BatchEvaluator::kLanes;

int arity(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kInput:
      return 0;
    case Op::kNeg:
    case Op::kPowInt:
    case Op::kTanh:
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kSqrt:
      return 1;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kAbs2:
      return 2;
    case Op::kFma:
      return 3;
  }
  return 0;
}

double ipow(double base, int exponent) {
  if (exponent == 0) return 1.0;
  unsigned n = exponent < 0 ? -static_cast<unsigned>(exponent) : static_cast<unsigned>(exponent);
  double acc = 1.0;
  double p = base;
  while (n != 0) {
    if (n & 1u) acc *= p;
    p *= p;
    n >>= 1;
  }
  return exponent < 0 ? 1.0 / acc : acc;
}

}  // namespace

BatchEvaluator::BatchEvaluator(Graph& graph, std::span<const Variable> lane_inputs)
    : graph_(&graph), compiled_size_(graph.size()) {
  const auto& nodes = graph.nodes_;
  const std::size_t n = nodes.size();

  vector_.assign(n, 0);
  slot_.assign(n, kNoSlot);
  for (Variable v : lane_inputs) {
    const std::uint32_t idx = graph.require(v);
    if (nodes[idx].op != Op::kInput)
      throw StructuralError("lane inputs must be free-variable nodes");
    if (vector_[idx]) throw ArgumentError("duplicate lane input");
    vector_[idx] = 1;
    slot_[idx] = static_cast<std::uint32_t>(n_slots_++);
    lane_input_nodes_.push_back(idx);
  }

  for (std::uint32_t i = 0; i < n; ++i) {
    const Node& nd = nodes[i];
    const int k = arity(nd.op);
    if (vector_[i]) continue;  // lane input
    const bool vec = (k >= 1 && vector_[nd.a]) || (k >= 2 && vector_[nd.b]) ||
                     (k >= 3 && vector_[nd.c]);
    if (vec) {
      vector_[i] = 1;
      slot_[i] = static_cast<std::uint32_t>(n_slots_++);
      Instr ins{};
      ins.op = nd.op;
      ins.aux = nd.aux;
      ins.dst = slot_[i];
      ins.mask = 0;
      if (k >= 1) {
        if (vector_[nd.a]) { ins.mask |= 1; ins.a = slot_[nd.a]; }
        ins.na = nd.a;
      }
      if (k >= 2) {
        if (vector_[nd.b]) { ins.mask |= 2; ins.b = slot_[nd.b]; }
        ins.nb = nd.b;
      }
      if (k >= 3) {
        if (vector_[nd.c]) { ins.mask |= 4; ins.c = slot_[nd.c]; }
        ins.nc = nd.c;
      }
      program_.push_back(ins);
    } else if (nd.op != Op::kConst && nd.op != Op::kInput) {
      scalar_eval_.push_back(i);
    }
  }

  ws_.assign(n_slots_ * kL, 0.0);
  adj_.assign(n_slots_ * kL, 0.0);
  scalar_accum_.assign(n, 0.0);
  refresh_scalars();
}

void BatchEvaluator::refresh_scalars() {
  Graph& g = *graph_;
  if (g.size() != compiled_size_)
    throw StructuralError("graph changed after evaluator compilation");
  for (std::size_t pos = 0; pos < g.inputs_.size(); ++pos) {
    const std::uint32_t idx = g.inputs_[pos];
    if (!vector_[idx] && !g.input_bound_[pos])
      throw StructuralError("unbound broadcast input");
  }
  for (std::uint32_t idx : scalar_eval_) g.values_[idx] = g.compute(g.nodes_[idx]);
  const auto& values = g.values_;
  for (Instr& ins : program_) {
    const int k = arity(ins.op);
    if (k >= 1 && !(ins.mask & 1)) ins.ia = values[ins.na];
    if (k >= 2 && !(ins.mask & 2)) ins.ib = values[ins.nb];
    if (k >= 3 && !(ins.mask & 4)) ins.ic = values[ins.nc];
  }
}

void BatchEvaluator::fetch(const Instr& ins, double* a, double* b, double* c) const {
  const int k = arity(ins.op);
  if (k >= 1) {
    if (ins.mask & 1) std::memcpy(a, &ws_[std::size_t(ins.a) * kL], kL * sizeof(double));
    else for (int l = 0; l < kL; ++l) a[l] = ins.ia;
  }
  if (k >= 2) {
    if (ins.mask & 2) std::memcpy(b, &ws_[std::size_t(ins.b) * kL], kL * sizeof(double));
    else for (int l = 0; l < kL; ++l) b[l] = ins.ib;
  }
  if (k >= 3) {
    if (ins.mask & 4) std::memcpy(c, &ws_[std::size_t(ins.c) * kL], kL * sizeof(double));
    else for (int l = 0; l < kL; ++l) c[l] = ins.ic;
  }
}

void BatchEvaluator::forward_chunk(const double* coords) {
  for (std::size_t r = 0; r < lane_input_nodes_.size(); ++r) {
    std::memcpy(&ws_[std::size_t(slot_[lane_input_nodes_[r]]) * kL], coords + r * kL,
                kL * sizeof(double));
  }
  double a[kL], b[kL], c[kL];
  for (const Instr& ins : program_) {
    fetch(ins, a, b, c);
    double* dst = &ws_[std::size_t(ins.dst) * kL];
    switch (ins.op) {
      case Op::kAdd:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] + b[l];
        break;
      case Op::kSub:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] - b[l];
        break;
      case Op::kMul:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] * b[l];
        break;
      case Op::kDiv:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] / b[l];
        break;
      case Op::kNeg:
        for (int l = 0; l < kL; ++l) dst[l] = -a[l];
        break;
      case Op::kPowInt:
        for (int l = 0; l < kL; ++l) dst[l] = ipow(a[l], ins.aux);
        break;
      case Op::kTanh:
        for (int l = 0; l < kL; ++l) dst[l] = std::tanh(a[l]);
        break;
      case Op::kSin:
        for (int l = 0; l < kL; ++l) dst[l] = std::sin(a[l]);
        break;
      case Op::kCos:
        for (int l = 0; l < kL; ++l) dst[l] = std::cos(a[l]);
        break;
      case Op::kExp:
        for (int l = 0; l < kL; ++l) dst[l] = std::exp(a[l]);
        break;
      case Op::kSqrt:
        for (int l = 0; l < kL; ++l) dst[l] = std::sqrt(a[l]);
        break;
      case Op::kAbs2:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] * a[l] + b[l] * b[l];
        break;
      case Op::kFma:
        for (int l = 0; l < kL; ++l) dst[l] = a[l] * b[l] + c[l];
        break;
      case Op::kConst:
      case Op::kInput:
        break;
    }
  }
}

double BatchEvaluator::lane_value(Variable v, int lane) const {
  const std::uint32_t idx = graph_->require(v);
  if (vector_[idx]) return ws_[std::size_t(slot_[idx]) * kL + lane];
  return graph_->values_[idx];
}

bool BatchEvaluator::is_vector(Variable v) const { return vector_[graph_->require(v)] != 0; }

void BatchEvaluator::zero_scalar_accum() {
  std::fill(scalar_accum_.begin(), scalar_accum_.end(), 0.0);
}

void BatchEvaluator::backward_chunk(std::span<const Variable> outputs, const double* seeds) {
  std::fill(adj_.begin(), adj_.end(), 0.0);
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const std::uint32_t idx = graph_->require(outputs[k]);
    const double* s = seeds + k * kL;
    if (vector_[idx]) {
      double* d = &adj_[std::size_t(slot_[idx]) * kL];
      for (int l = 0; l < kL; ++l) d[l] += s[l];
    } else {
      double sum = 0.0;
      for (int l = 0; l < kL; ++l) sum += s[l];
      scalar_accum_[idx] += sum;
    }
  }

  double a[kL], b[kL], c[kL], t[kL];
  auto deposit = [&](const Instr& ins, int operand, const double* contrib) {
    const bool vec = (ins.mask >> operand) & 1;
    if (vec) {
      const std::uint32_t slot = operand == 0 ? ins.a : operand == 1 ? ins.b : ins.c;
      double* d = &adj_[std::size_t(slot) * kL];
      for (int l = 0; l < kL; ++l) d[l] += contrib[l];
    } else {
      const std::uint32_t node = operand == 0 ? ins.na : operand == 1 ? ins.nb : ins.nc;
      double sum = 0.0;
      for (int l = 0; l < kL; ++l) sum += contrib[l];
      scalar_accum_[node] += sum;
    }
  };

  for (std::size_t p = program_.size(); p-- > 0;) {
    const Instr& ins = program_[p];
    const double* w = &adj_[std::size_t(ins.dst) * kL];
    const double* r = &ws_[std::size_t(ins.dst) * kL];
    switch (ins.op) {
      case Op::kAdd:
        deposit(ins, 0, w);
        deposit(ins, 1, w);
        break;
      case Op::kSub:
        deposit(ins, 0, w);
        for (int l = 0; l < kL; ++l) t[l] = -w[l];
        deposit(ins, 1, t);
        break;
      case Op::kMul:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = w[l] * b[l];
        deposit(ins, 0, t);
        for (int l = 0; l < kL; ++l) t[l] = w[l] * a[l];
        deposit(ins, 1, t);
        break;
      case Op::kDiv:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = w[l] / b[l];
        deposit(ins, 0, t);
        for (int l = 0; l < kL; ++l) t[l] = -w[l] * r[l] / b[l];
        deposit(ins, 1, t);
        break;
      case Op::kNeg:
        for (int l = 0; l < kL; ++l) t[l] = -w[l];
        deposit(ins, 0, t);
        break;
      case Op::kPowInt:
        if (ins.aux != 0) {
          fetch(ins, a, b, c);
          for (int l = 0; l < kL; ++l) t[l] = w[l] * ins.aux * ipow(a[l], ins.aux - 1);
          deposit(ins, 0, t);
        }
        break;
      case Op::kTanh:
        for (int l = 0; l < kL; ++l) t[l] = w[l] * (1.0 - r[l] * r[l]);
        deposit(ins, 0, t);
        break;
      case Op::kSin:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = w[l] * std::cos(a[l]);
        deposit(ins, 0, t);
        break;
      case Op::kCos:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = -w[l] * std::sin(a[l]);
        deposit(ins, 0, t);
        break;
      case Op::kExp:
        for (int l = 0; l < kL; ++l) t[l] = w[l] * r[l];
        deposit(ins, 0, t);
        break;
      case Op::kSqrt:
        for (int l = 0; l < kL; ++l) t[l] = w[l] / (2.0 * r[l]);
        deposit(ins, 0, t);
        break;
      case Op::kAbs2:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = 2.0 * w[l] * a[l];
        deposit(ins, 0, t);
        for (int l = 0; l < kL; ++l) t[l] = 2.0 * w[l] * b[l];
        deposit(ins, 1, t);
        break;
      case Op::kFma:
        fetch(ins, a, b, c);
        for (int l = 0; l < kL; ++l) t[l] = w[l] * b[l];
        deposit(ins, 0, t);
        for (int l = 0; l < kL; ++l) t[l] = w[l] * a[l];
        deposit(ins, 1, t);
        deposit(ins, 2, w);
        break;
      case Op::kConst:
      case Op::kInput:
        break;
    }
  }
}

void BatchEvaluator::finish_backward(std::vector<double>& adjoints) const {
  const Graph& g = *graph_;
  const auto& nodes = g.nodes_;
  const auto& values = g.values_;
  adjoints = scalar_accum_;

  for (std::size_t i = nodes.size(); i-- > 0;) {
    if (vector_[i]) continue;
    const double w = adjoints[i];
    if (w == 0.0) continue;
    const Node& n = nodes[i];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kAdd:
        adjoints[n.a] += w;
        adjoints[n.b] += w;
        break;
      case Op::kSub:
        adjoints[n.a] += w;
        adjoints[n.b] -= w;
        break;
      case Op::kMul:
        adjoints[n.a] += w * values[n.b];
        adjoints[n.b] += w * values[n.a];
        break;
      case Op::kDiv:
        adjoints[n.a] += w / values[n.b];
        adjoints[n.b] -= w * values[i] / values[n.b];
        break;
      case Op::kNeg:
        adjoints[n.a] -= w;
        break;
      case Op::kPowInt:
        if (n.aux != 0) adjoints[n.a] += w * n.aux * ipow(values[n.a], n.aux - 1);
        break;
      case Op::kTanh:
        adjoints[n.a] += w * (1.0 - values[i] * values[i]);
        break;
      case Op::kSin:
        adjoints[n.a] += w * std::cos(values[n.a]);
        break;
      case Op::kCos:
        adjoints[n.a] -= w * std::sin(values[n.a]);
        break;
      case Op::kExp:
        adjoints[n.a] += w * values[i];
        break;
      case Op::kSqrt:
        adjoints[n.a] += w / (2.0 * values[i]);
        break;
      case Op::kAbs2:
        adjoints[n.a] += 2.0 * w * values[n.a];
        adjoints[n.b] += 2.0 * w * values[n.b];
        break;
      case Op::kFma:
        adjoints[n.a] += w * values[n.b];
        adjoints[n.b] += w * values[n.a];
        adjoints[n.c] += w;
        break;
    }
  }
}

}  // namespace pinn
