#include "pinn/autodiff.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace pinn {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

/// Exact integer power by repeated squaring (deterministic across platforms,
/// unlike std::pow for integral exponents).
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

}  // namespace

double Variable::value() const {
  if (graph_ == nullptr) throw StructuralError("value() on a default-constructed variable");
  return graph_->value(*this);
}

std::uint32_t Graph::require(Variable v) const {
  if (v.graph() != this)
    throw StructuralError("variable does not belong to this graph");
  if (v.index() >= nodes_.size())
    throw StructuralError("variable index out of range");
  return v.index();
}

double Graph::compute(const Node& n) const {
  switch (n.op) {
    case Op::kConst:
    case Op::kInput:
      break;  // values are stored, never recomputed
    case Op::kAdd:
      return values_[n.a] + values_[n.b];
    case Op::kSub:
      return values_[n.a] - values_[n.b];
    case Op::kMul:
      return values_[n.a] * values_[n.b];
    case Op::kDiv:
      return values_[n.a] / values_[n.b];
    case Op::kNeg:
      return -values_[n.a];
    case Op::kPowInt:
      return ipow(values_[n.a], n.aux);
    case Op::kTanh:
      return std::tanh(values_[n.a]);
    case Op::kSin:
      return std::sin(values_[n.a]);
    case Op::kCos:
      return std::cos(values_[n.a]);
    case Op::kExp:
      return std::exp(values_[n.a]);
    case Op::kSqrt:
      return std::sqrt(values_[n.a]);
    case Op::kAbs2:
      return values_[n.a] * values_[n.a] + values_[n.b] * values_[n.b];
    case Op::kFma:
      return values_[n.a] * values_[n.b] + values_[n.c];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Variable Graph::push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                     std::int32_t aux) {
  if (nodes_.size() >= kNone)
    throw StructuralError("graph node capacity exhausted");
  Node n{op, a, b, c, aux};
  nodes_.push_back(n);
  values_.push_back(compute(n));
  return Variable(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Variable Graph::constant(double value) {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(value);
  if (auto it = constant_pool_.find(key); it != constant_pool_.end())
    return Variable(this, it->second);
  Variable v = push(Op::kConst, 0, 0, 0, 0);
  values_.back() = value;
  constant_pool_.emplace(key, v.index());
  return v;
}

Variable Graph::input() {
  // aux stores the position in the free-variable registry for O(1) bind().
  Variable v = push(Op::kInput, 0, 0, 0, static_cast<std::int32_t>(inputs_.size()));
  values_.back() = std::numeric_limits<double>::quiet_NaN();
  inputs_.push_back(v.index());
  input_bound_.push_back(0);
  return v;
}

Variable Graph::input(double value) {
  Variable v = input();
  values_[v.index()] = value;
  input_bound_.back() = 1;
  return v;
}

Variable Graph::add(Variable a, Variable b) { return push(Op::kAdd, require(a), require(b), 0, 0); }
Variable Graph::sub(Variable a, Variable b) { return push(Op::kSub, require(a), require(b), 0, 0); }
Variable Graph::mul(Variable a, Variable b) { return push(Op::kMul, require(a), require(b), 0, 0); }
Variable Graph::div(Variable a, Variable b) { return push(Op::kDiv, require(a), require(b), 0, 0); }
Variable Graph::neg(Variable a) { return push(Op::kNeg, require(a), 0, 0, 0); }
Variable Graph::pow_int(Variable base, int exponent) {
  return push(Op::kPowInt, require(base), 0, 0, exponent);
}
Variable Graph::tanh(Variable a) { return push(Op::kTanh, require(a), 0, 0, 0); }
Variable Graph::sin(Variable a) { return push(Op::kSin, require(a), 0, 0, 0); }
Variable Graph::cos(Variable a) { return push(Op::kCos, require(a), 0, 0, 0); }
Variable Graph::exp(Variable a) { return push(Op::kExp, require(a), 0, 0, 0); }
Variable Graph::sqrt(Variable a) { return push(Op::kSqrt, require(a), 0, 0, 0); }
Variable Graph::abs2(Variable re, Variable im) {
  return push(Op::kAbs2, require(re), require(im), 0, 0);
}
Variable Graph::fma(Variable a, Variable b, Variable c) {
  return push(Op::kFma, require(a), require(b), require(c), 0);
}

void Graph::bind(Variable input, double value) {
  const std::uint32_t idx = require(input);
  const Node& n = nodes_[idx];
  if (n.op != Op::kInput)
    throw StructuralError("bind() target is not a free variable");
  values_[idx] = value;
  input_bound_[static_cast<std::uint32_t>(n.aux)] = 1;
}

void Graph::forward() {
  for (std::size_t pos = 0; pos < inputs_.size(); ++pos) {
    if (!input_bound_[pos])
      throw StructuralError("forward() with an unbound free variable");
  }
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = nodes_[i];
    if (node.op == Op::kConst || node.op == Op::kInput) continue;
    values_[i] = compute(node);
  }
}

void Graph::eval(std::span<const std::pair<Variable, double>> bindings) {
  for (const auto& [v, x] : bindings) bind(v, x);
  forward();
}

double Graph::value(Variable v) const { return values_[require(v)]; }

std::vector<Variable> Graph::grad(Variable output, std::span<const Variable> wrt) {
  const std::uint32_t out = require(output);
  const std::uint32_t n0 = out + 1;

  std::vector<std::uint8_t> is_wrt(n0, 0);
  for (Variable v : wrt) {
    const std::uint32_t idx = require(v);
    if (nodes_[idx].op != Op::kInput)
      throw StructuralError("grad() requires free-variable nodes in wrt");
    if (idx < n0) is_wrt[idx] = 1;
  }

  // active: value depends on at least one wrt variable.
  std::vector<std::uint8_t> active(n0, 0);
  for (std::uint32_t i = 0; i < n0; ++i) {
    if (is_wrt[i]) {
      active[i] = 1;
      continue;
    }
    const Node& n = nodes_[i];
    const int k = arity(n.op);
    active[i] = (k >= 1 && active[n.a]) || (k >= 2 && active[n.b]) ||
                (k >= 3 && active[n.c]);
  }

  // lives: value feeds the output.
  std::vector<std::uint8_t> lives(n0, 0);
  lives[out] = 1;
  for (std::uint32_t i = out + 1; i-- > 0;) {
    if (!lives[i]) continue;
    const Node& n = nodes_[i];
    const int k = arity(n.op);
    if (k >= 1) lives[n.a] = 1;
    if (k >= 2) lives[n.b] = 1;
    if (k >= 3) lives[n.c] = 1;
  }

  std::vector<std::uint32_t> adj(n0, kNone);
  const Variable one = constant(1.0);
  if (active[out]) adj[out] = one.index();

  // slot += w
  auto acc = [&](std::uint32_t target, Variable w) {
    if (!active[target]) return;
    adj[target] = adj[target] == kNone ? w.index() : add(at(adj[target]), w).index();
  };
  // slot -= w
  auto acc_neg = [&](std::uint32_t target, Variable w) {
    if (!active[target]) return;
    adj[target] = adj[target] == kNone ? neg(w).index() : sub(at(adj[target]), w).index();
  };
  // slot += x*y, fused with the running sum where possible
  auto acc_prod = [&](std::uint32_t target, Variable x, Variable y) {
    if (!active[target]) return;
    adj[target] =
        adj[target] == kNone ? mul(x, y).index() : fma(x, y, at(adj[target])).index();
  };

  for (std::uint32_t i = out + 1; i-- > 0;) {
    if (!lives[i] || !active[i] || adj[i] == kNone) continue;
    const Node n = nodes_[i];
    const Variable w = at(adj[i]);
    const Variable self = at(i);
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kAdd:
        acc(n.a, w);
        acc(n.b, w);
        break;
      case Op::kSub:
        acc(n.a, w);
        acc_neg(n.b, w);
        break;
      case Op::kMul:
        acc_prod(n.a, w, at(n.b));
        acc_prod(n.b, w, at(n.a));
        break;
      case Op::kDiv:
        if (active[n.a]) acc(n.a, div(w, at(n.b)));
        if (active[n.b]) acc_neg(n.b, div(mul(w, self), at(n.b)));
        break;
      case Op::kNeg:
        acc_neg(n.a, w);
        break;
      case Op::kPowInt:
        if (n.aux == 1) {
          acc(n.a, w);
        } else if (n.aux == 2) {
          acc_prod(n.a, w, add(at(n.a), at(n.a)));
        } else if (n.aux != 0) {
          Variable factor =
              mul(constant(static_cast<double>(n.aux)), pow_int(at(n.a), n.aux - 1));
          acc_prod(n.a, w, factor);
        }
        break;
      case Op::kTanh:
        acc_prod(n.a, w, sub(one, mul(self, self)));
        break;
      case Op::kSin:
        acc_prod(n.a, w, cos(at(n.a)));
        break;
      case Op::kCos:
        acc_neg(n.a, mul(w, sin(at(n.a))));
        break;
      case Op::kExp:
        acc_prod(n.a, w, self);
        break;
      case Op::kSqrt:
        acc(n.a, div(w, add(self, self)));
        break;
      case Op::kAbs2: {
        const Variable two_w = add(w, w);
        acc_prod(n.a, two_w, at(n.a));
        acc_prod(n.b, two_w, at(n.b));
        break;
      }
      case Op::kFma:
        acc_prod(n.a, w, at(n.b));
        acc_prod(n.b, w, at(n.a));
        acc(n.c, w);
        break;
    }
  }

  std::vector<Variable> result;
  result.reserve(wrt.size());
  const Variable zero = constant(0.0);
  for (Variable v : wrt) {
    const std::uint32_t idx = v.index();
    result.push_back(idx < n0 && adj[idx] != kNone ? at(adj[idx]) : zero);
  }
  return result;
}

std::vector<Variable> Graph::tangents(std::span<const Variable> outputs, Variable wrt) {
  const std::uint32_t w = require(wrt);
  if (nodes_[w].op != Op::kInput)
    throw StructuralError("tangents() requires a free-variable node for wrt");

  std::uint32_t max_out = 0;
  for (Variable v : outputs) max_out = std::max(max_out, require(v));
  const std::uint32_t n0 = outputs.empty() ? 0 : max_out + 1;

  std::vector<std::uint8_t> active(n0, 0);
  std::vector<std::uint8_t> need(n0, 0);
  if (w < n0) active[w] = 1;
  for (std::uint32_t i = 0; i < n0; ++i) {
    const Node& n = nodes_[i];
    const int k = arity(n.op);
    if ((k >= 1 && active[n.a]) || (k >= 2 && active[n.b]) || (k >= 3 && active[n.c]))
      active[i] = 1;
  }
  for (Variable v : outputs)
    if (v.index() < n0) need[v.index()] = 1;
  for (std::uint32_t i = n0; i-- > 0;) {
    if (!need[i]) continue;
    const Node& n = nodes_[i];
    const int k = arity(n.op);
    if (k >= 1) need[n.a] = 1;
    if (k >= 2) need[n.b] = 1;
    if (k >= 3) need[n.c] = 1;
  }

  const Variable one = constant(1.0);
  std::vector<std::uint32_t> dot(n0, kNone);
  if (w < n0) dot[w] = one.index();

  for (std::uint32_t i = 0; i < n0; ++i) {
    if (!active[i] || !need[i]) continue;
    const Node n = nodes_[i];
    if (n.op == Op::kConst || n.op == Op::kInput) continue;
    const Variable self = at(i);
    const int k = arity(n.op);
    const std::uint32_t da = k >= 1 && active[n.a] ? dot[n.a] : kNone;
    const std::uint32_t db = k >= 2 && active[n.b] ? dot[n.b] : kNone;
    const std::uint32_t dc = k >= 3 && active[n.c] ? dot[n.c] : kNone;
    std::uint32_t d = kNone;
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kAdd:
        if (da != kNone && db != kNone) d = add(at(da), at(db)).index();
        else d = da != kNone ? da : db;
        break;
      case Op::kSub:
        if (da != kNone && db != kNone) d = sub(at(da), at(db)).index();
        else if (da != kNone) d = da;
        else if (db != kNone) d = neg(at(db)).index();
        break;
      case Op::kMul:
        if (da != kNone && db != kNone)
          d = fma(at(da), at(n.b), mul(at(n.a), at(db))).index();
        else if (da != kNone) d = mul(at(da), at(n.b)).index();
        else if (db != kNone) d = mul(at(n.a), at(db)).index();
        break;
      case Op::kDiv:
        if (da != kNone && db != kNone)
          d = div(sub(at(da), mul(self, at(db))), at(n.b)).index();
        else if (da != kNone) d = div(at(da), at(n.b)).index();
        else if (db != kNone) d = neg(div(mul(self, at(db)), at(n.b))).index();
        break;
      case Op::kNeg:
        if (da != kNone) d = neg(at(da)).index();
        break;
      case Op::kPowInt:
        if (da != kNone && n.aux != 0) {
          if (n.aux == 1) d = da;
          else if (n.aux == 2) d = mul(add(at(n.a), at(n.a)), at(da)).index();
          else
            d = mul(mul(constant(static_cast<double>(n.aux)), pow_int(at(n.a), n.aux - 1)),
                    at(da))
                    .index();
        }
        break;
      case Op::kTanh:
        if (da != kNone) d = mul(sub(one, mul(self, self)), at(da)).index();
        break;
      case Op::kSin:
        if (da != kNone) d = mul(cos(at(n.a)), at(da)).index();
        break;
      case Op::kCos:
        if (da != kNone) d = neg(mul(sin(at(n.a)), at(da))).index();
        break;
      case Op::kExp:
        if (da != kNone) d = mul(self, at(da)).index();
        break;
      case Op::kSqrt:
        if (da != kNone) d = div(at(da), add(self, self)).index();
        break;
      case Op::kAbs2:
        if (da != kNone && db != kNone) {
          Variable t = fma(at(n.a), at(da), mul(at(n.b), at(db)));
          d = add(t, t).index();
        } else if (da != kNone) {
          Variable t = mul(at(n.a), at(da));
          d = add(t, t).index();
        } else if (db != kNone) {
          Variable t = mul(at(n.b), at(db));
          d = add(t, t).index();
        }
        break;
      case Op::kFma:
        if (da != kNone && db != kNone) {
          Variable p = fma(at(da), at(n.b), mul(at(n.a), at(db)));
          d = dc != kNone ? add(p, at(dc)).index() : p.index();
        } else if (da != kNone) {
          d = dc != kNone ? fma(at(da), at(n.b), at(dc)).index()
                          : mul(at(da), at(n.b)).index();
        } else if (db != kNone) {
          d = dc != kNone ? fma(at(n.a), at(db), at(dc)).index()
                          : mul(at(n.a), at(db)).index();
        } else {
          d = dc;
        }
        break;
    }
    dot[i] = d;
  }

  std::vector<Variable> result;
  result.reserve(outputs.size());
  const Variable zero = constant(0.0);
  for (Variable v : outputs) {
    const std::uint32_t idx = v.index();
    result.push_back(idx < n0 && dot[idx] != kNone ? at(dot[idx]) : zero);
  }
  return result;
}

void Graph::backward(std::span<const Variable> outputs, std::span<const double> seeds,
                     std::vector<double>& adjoints) const {
  if (outputs.size() != seeds.size())
    throw ArgumentError("backward() outputs and seeds differ in length");
  adjoints.assign(nodes_.size(), 0.0);
  for (std::size_t k = 0; k < outputs.size(); ++k)
    adjoints[require(outputs[k])] += seeds[k];

  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const double w = adjoints[i];
    if (w == 0.0) continue;
    const Node& n = nodes_[i];
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
        adjoints[n.a] += w * values_[n.b];
        adjoints[n.b] += w * values_[n.a];
        break;
      case Op::kDiv:
        adjoints[n.a] += w / values_[n.b];
        adjoints[n.b] -= w * values_[i] / values_[n.b];
        break;
      case Op::kNeg:
        adjoints[n.a] -= w;
        break;
      case Op::kPowInt:
        if (n.aux != 0)
          adjoints[n.a] += w * n.aux * ipow(values_[n.a], n.aux - 1);
        break;
      case Op::kTanh:
        adjoints[n.a] += w * (1.0 - values_[i] * values_[i]);
        break;
      case Op::kSin:
        adjoints[n.a] += w * std::cos(values_[n.a]);
        break;
      case Op::kCos:
        adjoints[n.a] -= w * std::sin(values_[n.a]);
        break;
      case Op::kExp:
        adjoints[n.a] += w * values_[i];
        break;
      case Op::kSqrt:
        adjoints[n.a] += w / (2.0 * values_[i]);
        break;
      case Op::kAbs2:
        adjoints[n.a] += 2.0 * w * values_[n.a];
        adjoints[n.b] += 2.0 * w * values_[n.b];
        break;
      case Op::kFma:
        adjoints[n.a] += w * values_[n.b];
        adjoints[n.b] += w * values_[n.a];
        adjoints[n.c] += w;
        break;
    }
  }
}

namespace {
Graph* common_graph(Variable a, Variable b) {
  Graph* g = a.graph() != nullptr ? a.graph() : b.graph();
  if (g == nullptr) throw StructuralError("operation on default-constructed variables");
  return g;
}
}  // namespace

Variable operator+(Variable a, Variable b) { return common_graph(a, b)->add(a, b); }
Variable operator-(Variable a, Variable b) { return common_graph(a, b)->sub(a, b); }
Variable operator*(Variable a, Variable b) { return common_graph(a, b)->mul(a, b); }
Variable operator/(Variable a, Variable b) { return common_graph(a, b)->div(a, b); }
Variable operator-(Variable a) { return common_graph(a, a)->neg(a); }
Variable operator+(double a, Variable b) { return common_graph(b, b)->add(b.graph()->constant(a), b); }
Variable operator+(Variable a, double b) { return common_graph(a, a)->add(a, a.graph()->constant(b)); }
Variable operator-(double a, Variable b) { return common_graph(b, b)->sub(b.graph()->constant(a), b); }
Variable operator-(Variable a, double b) { return common_graph(a, a)->sub(a, a.graph()->constant(b)); }
Variable operator*(double a, Variable b) { return common_graph(b, b)->mul(b.graph()->constant(a), b); }
Variable operator*(Variable a, double b) { return common_graph(a, a)->mul(a, a.graph()->constant(b)); }
Variable operator/(double a, Variable b) { return common_graph(b, b)->div(b.graph()->constant(a), b); }
Variable operator/(Variable a, double b) { return common_graph(a, a)->div(a, a.graph()->constant(b)); }

}  // namespace pinn
