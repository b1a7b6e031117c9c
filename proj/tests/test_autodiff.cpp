#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "oracle_helpers.hpp"
#include "pinn/autodiff.hpp"
#include "pinn/batch_eval.hpp"
#include "pinn/rng.hpp"

using pinn::BatchEvaluator;
using pinn::Graph;
using pinn::Rng;
using pinn::StructuralError;
using pinn::Variable;

namespace {

double value_at(Graph& g, Variable target, Variable in, double v) {
  g.bind(in, v);
  g.forward();
  return g.value(target);
}

/// Fully-connected 2-16-1 tanh network built node by node with seeded random
/// weights; returns the inputs, scalar output, and the parameter list.
struct NetVars {
  Variable x, y, u;
  std::vector<Variable> params;
};

NetVars build_net(Graph& g, std::uint64_t seed) {
  NetVars n;
  n.x = g.input(0.3);
  n.y = g.input(-0.2);
  Rng rng(seed);
  auto param = [&](double scale) {
    Variable p = g.input(scale * rng.normal());
    n.params.push_back(p);
    return p;
  };
  Variable out;
  for (int j = 0; j < 16; ++j) {
    Variable z = g.fma(param(0.7), n.x, g.fma(param(0.7), n.y, param(0.4)));
    Variable h = g.tanh(z);
    out = j == 0 ? g.mul(param(0.7), h) : g.fma(param(0.7), h, out);
  }
  n.u = g.add(out, param(0.2));
  return n;
}

}  // namespace

TEST_CASE("evaluating elementary graphs") {
  Graph g;
  Variable x = g.input(3.0);
  Variable y = g.input(4.0);
  Variable p = g.mul(x, y);
  CHECK(g.value(p) == 12.0);

  Variable t = g.tanh(g.constant(0.0));
  CHECK(g.value(t) == 0.0);

  Variable e = g.exp(g.constant(1.0));
  const double want = 2.718281828459045;
  CHECK(std::abs(g.value(e) - want) <= std::nextafter(want, 10.0) - want);
}

TEST_CASE("rebinding free variables reproduces values bit for bit") {
  Graph g;
  Variable x = g.input(0.5);
  Variable y = g.input(-1.25);
  Variable f = g.add(g.tanh(g.mul(x, y)), g.div(g.exp(x), g.add(g.sqrt(g.abs2(x, y)), g.constant(2.0))));

  g.forward();
  const double v1 = g.value(f);
  g.bind(x, 9.0);
  g.bind(y, 2.0);
  g.forward();
  g.bind(x, 0.5);
  g.bind(y, -1.25);
  g.forward();
  CHECK(g.value(f) == v1);
}

TEST_CASE("constants of equal bit pattern are pooled") {
  Graph g;
  Variable a = g.constant(0.5);
  const std::size_t before = g.size();
  Variable b = g.constant(0.5);
  CHECK(a.index() == b.index());
  CHECK(g.size() == before);
  // A different bit pattern gets its own node.
  Variable c = g.constant(-0.0);
  Variable d = g.constant(0.0);
  CHECK(c.index() != d.index());
}

TEST_CASE("textbook derivative values") {
  {
    Graph g;
    Variable x = g.input(0.0);
    Variable y = g.tanh(x);
    auto d = g.grad(y, {x});
    CHECK(g.value(d[0]) == 1.0);
  }
  {
    Graph g;
    Variable x = g.input(2.0);
    Variable y = g.pow_int(x, 3);
    auto d1 = g.grad(y, {x});
    auto d2 = g.grad(d1[0], {x});
    CHECK(g.value(d2[0]) == 12.0);
  }
}

TEST_CASE("first derivatives match central differences for every opcode") {
  constexpr double kH = 1e-6;
  constexpr double kTol = 1e-5;
  constexpr int kPoints = 100;

  // Each entry builds y = f(x, c) with a second bound operand where needed,
  // over an x-range that keeps df/dx away from zero and singularities.
  struct UnaryCase {
    const char* name;
    double lo, hi;
    std::function<Variable(Graph&, Variable, Variable)> build;
  };
  const UnaryCase cases[] = {
      {"add", 0.3, 2.0, [](Graph& g, Variable x, Variable c) { return g.add(x, c); }},
      {"sub", 0.3, 2.0, [](Graph& g, Variable x, Variable c) { return g.sub(c, x); }},
      {"mul", 0.3, 2.0, [](Graph& g, Variable x, Variable c) { return g.mul(x, c); }},
      {"div-num", 0.3, 2.0, [](Graph& g, Variable x, Variable c) { return g.div(x, c); }},
      {"div-den", 0.4, 2.0, [](Graph& g, Variable x, Variable c) { return g.div(c, x); }},
      {"neg", 0.3, 2.0, [](Graph& g, Variable x, Variable) { return g.neg(x); }},
      {"pow3", 0.4, 1.6, [](Graph& g, Variable x, Variable) { return g.pow_int(x, 3); }},
      {"pow-2", 0.4, 1.6, [](Graph& g, Variable x, Variable) { return g.pow_int(x, -2); }},
      {"tanh", -1.5, 1.5, [](Graph& g, Variable x, Variable) { return g.tanh(x); }},
      {"sin", -1.0, 1.0, [](Graph& g, Variable x, Variable) { return g.sin(x); }},
      {"cos", 0.4, 2.7, [](Graph& g, Variable x, Variable) { return g.cos(x); }},
      {"exp", -1.0, 1.5, [](Graph& g, Variable x, Variable) { return g.exp(x); }},
      {"sqrt", 0.3, 2.0, [](Graph& g, Variable x, Variable) { return g.sqrt(x); }},
      {"abs2-a", 0.3, 1.5, [](Graph& g, Variable x, Variable c) { return g.abs2(x, c); }},
      {"abs2-b", 0.3, 1.5, [](Graph& g, Variable x, Variable c) { return g.abs2(c, x); }},
      {"fma-a", 0.3, 1.5, [](Graph& g, Variable x, Variable c) { return g.fma(x, c, c); }},
      {"fma-b", 0.3, 1.5, [](Graph& g, Variable x, Variable c) { return g.fma(c, x, c); }},
      {"fma-c", 0.3, 1.5, [](Graph& g, Variable x, Variable c) { return g.fma(c, c, x); }},
  };

  Rng rng(42);
  for (const auto& tc : cases) {
    CAPTURE(tc.name);
    Graph g;
    Variable x = g.input(1.0);
    Variable c = g.input(rng.uniform(0.5, 1.5));
    Variable y = tc.build(g, x, c);
    auto d = g.grad(y, {x});
    for (int i = 0; i < kPoints; ++i) {
      const double x0 = rng.uniform(tc.lo, tc.hi);
      auto f = [&](double v) { return value_at(g, y, x, v); };
      const double fd = oracle::central_diff(f, x0, kH);
      g.bind(x, x0);
      g.forward();
      const double ad = g.value(d[0]);
      CAPTURE(x0);
      CHECK(oracle::rel_err(ad, fd) < kTol);
    }
  }
}

TEST_CASE("second derivatives match finite differences of the gradient") {
  constexpr double kH = 1e-4;
  constexpr double kTol = 1e-4;
  constexpr int kPoints = 20;

  struct Case {
    const char* name;
    double lo, hi;
    std::function<Variable(Graph&, Variable)> build;
  };
  const Case cases[] = {
      {"tanh", -1.2, 1.2, [](Graph& g, Variable x) { return g.tanh(x); }},
      {"sin", 0.4, 2.7, [](Graph& g, Variable x) { return g.sin(x); }},
      {"cos", -1.0, 1.0, [](Graph& g, Variable x) { return g.cos(x); }},
      {"exp", -1.0, 1.5, [](Graph& g, Variable x) { return g.exp(x); }},
      {"sqrt", 0.4, 2.0, [](Graph& g, Variable x) { return g.sqrt(x); }},
      {"pow3", 0.4, 1.6, [](Graph& g, Variable x) { return g.pow_int(x, 3); }},
      {"pow-2", 0.4, 1.6, [](Graph& g, Variable x) { return g.pow_int(x, -2); }},
      {"recip", 0.4, 1.6, [](Graph& g, Variable x) { return g.div(g.constant(1.5), x); }},
      {"square-mul", 0.4, 1.6, [](Graph& g, Variable x) { return g.mul(x, x); }},
      {"abs2", 0.3, 1.5, [](Graph& g, Variable x) { return g.abs2(x, x); }},
      {"fma-quad", 0.3, 1.5, [](Graph& g, Variable x) { return g.fma(x, x, x); }},
  };

  Rng rng(43);
  for (const auto& tc : cases) {
    CAPTURE(tc.name);
    Graph g;
    Variable x = g.input(1.0);
    Variable y = tc.build(g, x);
    auto d1 = g.grad(y, {x});
    auto d2 = g.grad(d1[0], {x});
    for (int i = 0; i < kPoints; ++i) {
      const double x0 = rng.uniform(tc.lo, tc.hi);
      auto df = [&](double v) { return value_at(g, d1[0], x, v); };
      const double fd = oracle::central_diff(df, x0, kH);
      g.bind(x, x0);
      g.forward();
      CAPTURE(x0);
      CHECK(oracle::rel_err(g.value(d2[0]), fd) < kTol);
    }
  }
}

TEST_CASE("network second derivative matches a finite-difference oracle") {
  Graph g;
  NetVars net = build_net(g, 7);
  auto ux = g.grad(net.u, {net.x});
  auto uxx = g.grad(ux[0], {net.x});

  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const double x0 = rng.uniform(-1.0, 1.0);
    const double y0 = rng.uniform(-1.0, 1.0);
    g.bind(net.y, y0);
    auto f = [&](double v) { return value_at(g, net.u, net.x, v); };
    const double fd = oracle::central_diff2(f, x0, 1e-4);
    g.bind(net.x, x0);
    g.forward();
    CAPTURE(x0);
    CAPTURE(y0);
    CHECK(oracle::rel_err(g.value(uxx[0]), fd) < 1e-5);
  }
}

TEST_CASE("gradient is linear in the objective") {
  Graph g;
  Variable x = g.input(0.7);
  Variable y = g.input(-0.4);
  Variable f = g.tanh(g.mul(x, y));
  Variable h = g.sub(g.exp(x), g.mul(y, y));

  Rng rng(5);
  for (int i = 0; i < 25; ++i) {
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    Variable combo = g.add(g.mul(g.constant(a), f), g.mul(g.constant(b), h));
    auto dc = g.grad(combo, {x, y});
    auto dfv = g.grad(f, {x, y});
    auto dhv = g.grad(h, {x, y});
    g.bind(x, rng.uniform(-1.0, 1.0));
    g.bind(y, rng.uniform(-1.0, 1.0));
    g.forward();
    for (int k = 0; k < 2; ++k) {
      const double lhs = g.value(dc[k]);
      const double rhs = a * g.value(dfv[k]) + b * g.value(dhv[k]);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("graph growth per differentiation pass is bounded") {
  Graph g;
  Variable x = g.input(0.6);
  Variable y = g.input(1.1);
  // One of every opcode.
  Variable f = g.add(g.tanh(g.mul(x, y)), g.div(g.exp(x), g.add(g.sqrt(y), g.constant(2.0))));
  f = g.sub(f, g.mul(g.sin(x), g.cos(y)));
  f = g.add(f, g.pow_int(x, 3));
  f = g.add(f, g.abs2(x, y));
  f = g.fma(f, g.constant(0.5), g.neg(x));

  const std::size_t size0 = g.size();
  auto d1 = g.grad(f, {x, y});
  const std::size_t size1 = g.size();
  CHECK(size1 - size0 <= 8 * size0);

  auto d2 = g.grad(d1[0], {x, y});
  (void)d2;
  const std::size_t size2 = g.size();
  CHECK(size2 - size1 <= 8 * size1);

  auto t = g.tangents({f}, x);
  (void)t;
  CHECK(g.size() - size2 <= 8 * size2);
}

TEST_CASE("unbound free variables are rejected at evaluation") {
  Graph g;
  Variable x = g.input();
  Variable y = g.tanh(x);
  (void)y;
  CHECK_THROWS_AS(g.forward(), StructuralError);
  g.bind(x, 0.25);
  CHECK_NOTHROW(g.forward());
}

TEST_CASE("variables cannot cross graphs") {
  Graph g1, g2;
  Variable a = g1.input(1.0);
  Variable b = g2.input(2.0);
  CHECK_THROWS_AS(g1.add(a, b), StructuralError);
  CHECK_THROWS_AS(g2.mul(a, b), StructuralError);
  Variable fa = g1.tanh(a);
  (void)fa;
  CHECK_THROWS_AS(g1.grad(fa, {b}), StructuralError);
}

TEST_CASE("differentiation targets must be free variables") {
  Graph g;
  Variable x = g.input(0.5);
  Variable y = g.tanh(x);
  Variable z = g.mul(y, y);
  CHECK_THROWS_AS(g.grad(z, {y}), StructuralError);
  CHECK_THROWS_AS(g.tangents({z}, y), StructuralError);
}

TEST_CASE("gradient of a non-influencing variable is zero") {
  Graph g;
  Variable x = g.input(0.5);
  Variable z = g.input(3.0);
  Variable y = g.exp(x);
  auto d = g.grad(y, {z});
  CHECK(g.value(d[0]) == 0.0);
}

TEST_CASE("forward-mode tangents agree with reverse-mode gradients") {
  Graph g;
  NetVars net = build_net(g, 11);
  auto gx = g.grad(net.u, {net.x});
  auto tx = g.tangents({net.u}, net.x);

  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    g.bind(net.x, rng.uniform(-1.0, 1.0));
    g.bind(net.y, rng.uniform(-1.0, 1.0));
    g.forward();
    CHECK(oracle::rel_err(g.value(tx[0]), g.value(gx[0])) < 1e-12);
  }
}

TEST_CASE("lane evaluation matches scalar evaluation bit for bit") {
  Graph g;
  NetVars net = build_net(g, 21);
  auto tx = g.tangents({net.u}, net.x);
  auto txx = g.tangents({tx[0]}, net.x);
  const Variable outs[] = {net.u, tx[0], txx[0]};

  constexpr int kL = BatchEvaluator::kLanes;
  Rng rng(22);
  double xs[2 * kL];
  for (int l = 0; l < kL; ++l) {
    xs[l] = rng.uniform(-1.0, 1.0);
    xs[kL + l] = rng.uniform(-1.0, 1.0);
  }

  double scalar_vals[3][kL];
  for (int l = 0; l < kL; ++l) {
    g.bind(net.x, xs[l]);
    g.bind(net.y, xs[kL + l]);
    g.forward();
    for (int k = 0; k < 3; ++k) scalar_vals[k][l] = g.value(outs[k]);
  }

  const Variable lane_inputs[] = {net.x, net.y};
  BatchEvaluator ev(g, lane_inputs);
  ev.forward_chunk(xs);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < kL; ++l) CHECK(ev.lane_value(outs[k], l) == scalar_vals[k][l]);
}

TEST_CASE("lane backward accumulates the same parameter gradient") {
  Graph g;
  NetVars net = build_net(g, 31);
  constexpr int kL = BatchEvaluator::kLanes;

  Rng rng(32);
  double coords[2 * kL];
  double targets[kL];
  for (int l = 0; l < kL; ++l) {
    coords[l] = rng.uniform(-1.0, 1.0);
    coords[kL + l] = rng.uniform(-1.0, 1.0);
    targets[l] = rng.uniform(-0.5, 0.5);
  }

  // Scalar route: accumulate d/dθ of Σ_l (u_l - target_l)² one point at a time.
  std::vector<double> want(net.params.size(), 0.0);
  std::vector<double> adj;
  const Variable outs[] = {net.u};
  for (int l = 0; l < kL; ++l) {
    g.bind(net.x, coords[l]);
    g.bind(net.y, coords[kL + l]);
    g.forward();
    const double seed = 2.0 * (g.value(net.u) - targets[l]);
    const double seeds[] = {seed};
    g.backward(outs, seeds, adj);
    for (std::size_t k = 0; k < net.params.size(); ++k) want[k] += adj[net.params[k].index()];
  }

  const Variable lane_inputs[] = {net.x, net.y};
  BatchEvaluator ev(g, lane_inputs);
  ev.refresh_scalars();
  ev.zero_scalar_accum();
  ev.forward_chunk(coords);
  double seeds[kL];
  for (int l = 0; l < kL; ++l) seeds[l] = 2.0 * (ev.lane_value(net.u, l) - targets[l]);
  ev.backward_chunk(outs, seeds);
  std::vector<double> got;
  ev.finish_backward(got);
  for (std::size_t k = 0; k < net.params.size(); ++k) {
    CAPTURE(k);
    CHECK(oracle::rel_err(got[net.params[k].index()], want[k]) < 1e-12);
  }
}
