#include "pinn/pinn_ct.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "pinn/batch_eval.hpp"
#include "pinn/errors.hpp"
#include "pinn/rng.hpp"

namespace pinn {
namespace {

constexpr double kViscosity = 0.01 / std::numbers::pi;

void check_inside(std::span<const double> values, double lo, double hi,
                  const char* what) {
  for (double v : values)
    if (!(v >= lo && v <= hi))
      throw ArgumentError(std::string(what) + " point outside the domain");
}

/// Builds the network and the t/x tangents needed by the residual builders.
struct FieldDerivatives {
  std::vector<Variable> value;  // u (and v)
  std::vector<Variable> d_t;
  std::vector<Variable> d_x;
  std::vector<Variable> d_xx;
};

FieldDerivatives field_with_derivatives(const MLPConfig& net,
                                        std::span<const Variable> params,
                                        Variable t, Variable x, Graph& g) {
  FieldDerivatives f;
  const Variable in[] = {t, x};
  f.value = mlp_forward(net, params, in, g);
  f.d_t = g.tangents(f.value, t);
  f.d_x = g.tangents(f.value, x);
  f.d_xx = g.tangents(f.d_x, x);
  return f;
}

SquaredBlock burgers_data_block(const CtProblem& p, const CtTrainingSet& d) {
  SquaredBlock b;
  b.graph = std::make_unique<Graph>();
  Graph& g = *b.graph;
  b.params = register_params(g, std::vector<double>(p.network.parameter_count(), 0.0));
  const Variable t = g.input(0.0), x = g.input(0.0);
  const Variable in[] = {t, x};
  b.point_inputs = {t, x};
  b.outputs = mlp_forward(p.network, b.params, in, g);
  b.coords = {d.t_u, d.x_u};
  b.targets = {d.u};
  b.mean = true;
  return b;
}

SquaredBlock burgers_residual_block(const CtProblem& p, const CtTrainingSet& d) {
  SquaredBlock b;
  b.graph = std::make_unique<Graph>();
  Graph& g = *b.graph;
  b.params = register_params(g, std::vector<double>(p.network.parameter_count(), 0.0));
  const Variable t = g.input(0.0), x = g.input(0.0);
  b.point_inputs = {t, x};
  const FieldDerivatives f =
      field_with_derivatives(p.network, b.params, t, x, g);
  b.outputs = {burgers_residual(f.value[0], f.d_t[0], f.d_x[0], f.d_xx[0])};
  b.coords = {d.t_f, d.x_f};
  b.targets = {{}};
  b.mean = true;
  return b;
}

SquaredBlock schrodinger_initial_block(const CtProblem& p, const CtTrainingSet& d) {
  SquaredBlock b;
  b.graph = std::make_unique<Graph>();
  Graph& g = *b.graph;
  b.params = register_params(g, std::vector<double>(p.network.parameter_count(), 0.0));
  const Variable t = g.input(p.domain.lower[0]);  // pinned to the initial time
  const Variable x = g.input(0.0);
  const Variable in[] = {t, x};
  b.point_inputs = {x};
  b.outputs = mlp_forward(p.network, b.params, in, g);
  b.coords = {d.x0};
  b.targets = {d.u0, d.v0};
  b.mean = true;
  return b;
}

SquaredBlock schrodinger_boundary_block(const CtProblem& p, const CtTrainingSet& d) {
  SquaredBlock b;
  b.graph = std::make_unique<Graph>();
  Graph& g = *b.graph;
  b.params = register_params(g, std::vector<double>(p.network.parameter_count(), 0.0));
  const Variable t = g.input(0.0);
  const Variable xl = g.input(p.domain.lower[1]);
  const Variable xr = g.input(p.domain.upper[1]);
  b.point_inputs = {t};
  const Variable in_l[] = {t, xl}, in_r[] = {t, xr};
  const auto left = mlp_forward(p.network, b.params, in_l, g);
  const auto right = mlp_forward(p.network, b.params, in_r, g);
  const auto left_x = g.tangents(left, xl);
  const auto right_x = g.tangents(right, xr);
  // Periodicity of the value and of the x-derivative, both components.
  b.outputs = {left[0] - right[0], left[1] - right[1],
               left_x[0] - right_x[0], left_x[1] - right_x[1]};
  b.coords = {d.t_b};
  b.targets = {{}, {}, {}, {}};
  b.mean = true;
  return b;
}

SquaredBlock schrodinger_residual_block(const CtProblem& p, const CtTrainingSet& d) {
  SquaredBlock b;
  b.graph = std::make_unique<Graph>();
  Graph& g = *b.graph;
  b.params = register_params(g, std::vector<double>(p.network.parameter_count(), 0.0));
  const Variable t = g.input(0.0), x = g.input(0.0);
  b.point_inputs = {t, x};
  const FieldDerivatives f =
      field_with_derivatives(p.network, b.params, t, x, g);
  const auto [fr, fi] = schrodinger_residual(f.value[0], f.value[1], f.d_t[0],
                                             f.d_t[1], f.d_xx[0], f.d_xx[1]);
  b.outputs = {fr, fi};
  b.coords = {d.t_f, d.x_f};
  b.targets = {{}, {}};
  b.mean = true;
  return b;
}

std::vector<SquaredBlock> assemble_blocks(const CtProblem& problem,
                                          const CtTrainingSet& data) {
  problem.validate();
  data.validate(problem);
  std::vector<SquaredBlock> blocks;
  if (problem.equation == CtEquation::kBurgers) {
    blocks.push_back(burgers_data_block(problem, data));
    if (!data.t_f.empty()) blocks.push_back(burgers_residual_block(problem, data));
  } else {
    blocks.push_back(schrodinger_initial_block(problem, data));
    blocks.push_back(schrodinger_boundary_block(problem, data));
    if (!data.t_f.empty())
      blocks.push_back(schrodinger_residual_block(problem, data));
  }
  return blocks;
}

}  // namespace

CtProblem CtProblem::burgers() {
  CtProblem p;
  p.equation = CtEquation::kBurgers;
  p.boundary = CtBoundary::kDirichletData;
  p.network = {.input_dim = 2, .hidden_layers = 8, .hidden_width = 20, .output_dim = 1};
  p.domain = {{0.0, -1.0}, {1.0, 1.0}};
  return p;
}

CtProblem CtProblem::schrodinger() {
  CtProblem p;
  p.equation = CtEquation::kSchrodinger;
  p.boundary = CtBoundary::kPeriodicWithDerivative;
  p.network = {.input_dim = 2, .hidden_layers = 4, .hidden_width = 100, .output_dim = 2};
  p.domain = {{0.0, -5.0}, {std::numbers::pi / 2.0, 5.0}};
  return p;
}

void CtProblem::validate() const {
  network.validate();
  domain.validate();
  if (domain.dim() != 2) throw ArgumentError("domain must be (t, x)");
  if (network.input_dim != 2) throw ArgumentError("network must take (t, x)");
  const int want = equation == CtEquation::kBurgers ? 1 : 2;
  if (network.output_dim != want)
    throw ArgumentError("network output width does not match the equation");
  if (equation == CtEquation::kSchrodinger &&
      boundary != CtBoundary::kPeriodicWithDerivative)
    throw ArgumentError("the complex-valued problem is periodic");
}

void CtTrainingSet::validate(const CtProblem& problem) const {
  if (t_f.size() != x_f.size())
    throw ArgumentError("collocation coordinate lists must have equal length");
  const auto& dom = problem.domain;
  check_inside(t_f, dom.lower[0], dom.upper[0], "collocation t");
  check_inside(x_f, dom.lower[1], dom.upper[1], "collocation x");
  if (problem.equation == CtEquation::kBurgers) {
    if (u.empty()) throw ArgumentError("the data term requires points");
    if (t_u.size() != u.size() || x_u.size() != u.size())
      throw ArgumentError("data point lists must have equal length");
    check_inside(t_u, dom.lower[0], dom.upper[0], "data t");
    check_inside(x_u, dom.lower[1], dom.upper[1], "data x");
  } else {
    if (x0.empty()) throw ArgumentError("the initial term requires points");
    if (u0.size() != x0.size() || v0.size() != x0.size())
      throw ArgumentError("initial point lists must have equal length");
    if (t_b.empty()) throw ArgumentError("the boundary term requires points");
    check_inside(x0, dom.lower[1], dom.upper[1], "initial x");
    check_inside(t_b, dom.lower[0], dom.upper[0], "boundary t");
  }
}

Variable burgers_residual(Variable u, Variable u_t, Variable u_x, Variable u_xx) {
  return u_t + u * u_x - kViscosity * u_xx;
}

std::pair<Variable, Variable> schrodinger_residual(Variable u, Variable v,
                                                   Variable u_t, Variable v_t,
                                                   Variable u_xx, Variable v_xx) {
  Graph& g = *u.graph();
  const Variable mod2 = g.abs2(u, v);
  return {-v_t + 0.5 * u_xx + mod2 * u, u_t + 0.5 * v_xx + mod2 * v};
}

CtObjective::CtObjective(const CtProblem& problem, const CtTrainingSet& data)
    : engine_(assemble_blocks(problem, data)) {}

std::pair<double, std::vector<double>> ct_loss(const CtProblem& problem,
                                               std::span<const double> params,
                                               const CtTrainingSet& data) {
  CtObjective objective(problem, data);
  if (params.size() != objective.parameter_count())
    throw ArgumentError("parameter vector has the wrong length");
  std::vector<double> grad(params.size());
  const double value = objective.evaluate(params, grad);
  return {value, std::move(grad)};
}

CtTrainResult train_ct(const CtProblem& problem, const CtTrainingSet& data,
                       std::uint64_t seed, const LBFGSConfig& config) {
  CtObjective objective(problem, data);
  std::vector<double> x0 = init_params(problem.network, seed);
  OptimizeReport report = minimize(objective.as_objective(), std::move(x0), config);
  return {report.parameters, std::move(report)};
}

SolutionGrid predict_grid(const CtProblem& problem, std::span<const double> params,
                          std::vector<double> t_grid, std::vector<double> x_grid) {
  problem.validate();
  if (params.size() != problem.network.parameter_count())
    throw ArgumentError("parameter vector has the wrong length");
  if (t_grid.empty() || x_grid.empty())
    throw ArgumentError("prediction grids must be non-empty");

  Graph g;
  const auto vars = register_params(g, params);
  const Variable t = g.input(0.0), x = g.input(0.0);
  const Variable in[] = {t, x};
  const auto out = mlp_forward(problem.network, vars, in, g);
  const Variable lane_inputs[] = {t, x};
  BatchEvaluator eval(g, lane_inputs);
  eval.refresh_scalars();

  const bool complex_field = problem.equation == CtEquation::kSchrodinger;
  SolutionGrid grid;
  grid.t = std::move(t_grid);
  grid.x = std::move(x_grid);
  grid.components = complex_field ? std::vector<std::string>{"u", "v", "habs"}
                                  : std::vector<std::string>{"u"};
  const std::size_t nt = grid.t.size(), nx = grid.x.size();
  grid.values.assign(grid.components.size(), std::vector<double>(nt * nx));

  constexpr int kLanes = BatchEvaluator::kLanes;
  const std::size_t total = nt * nx;
  double chunk[2 * kLanes];
  for (std::size_t base = 0; base < total; base += kLanes) {
    const int live = static_cast<int>(std::min<std::size_t>(kLanes, total - base));
    for (int l = 0; l < kLanes; ++l) {
      const std::size_t p = base + (l < live ? l : 0);
      chunk[l] = grid.t[p / nx];
      chunk[kLanes + l] = grid.x[p % nx];
    }
    eval.forward_chunk(chunk);
    for (int l = 0; l < live; ++l) {
      const std::size_t p = base + l;
      const double a = eval.lane_value(out[0], l);
      grid.values[0][p] = a;
      if (complex_field) {
        const double b = eval.lane_value(out[1], l);
        grid.values[1][p] = b;
        grid.values[2][p] = std::sqrt(a * a + b * b);
      }
    }
  }
  return grid;
}

CtTrainingSet make_burgers_training_set(std::size_t n_u, std::size_t n_f,
                                        std::uint64_t seed, double noise_std) {
  if (n_u == 0) throw ArgumentError("the data term requires points");
  if (noise_std < 0.0) throw ArgumentError("noise level must be non-negative");
  const CtProblem p = CtProblem::burgers();
  Rng rng(seed);
  CtTrainingSet d;

  // Half the data budget on the initial profile, half on the boundaries.
  const std::size_t n_ic = (n_u + 1) / 2;
  for (std::size_t i = 0; i < n_ic; ++i) {
    const double x = rng.uniform(p.domain.lower[1], p.domain.upper[1]);
    d.t_u.push_back(p.domain.lower[0]);
    d.x_u.push_back(x);
    d.u.push_back(-std::sin(std::numbers::pi * x));
  }
  for (std::size_t i = n_ic; i < n_u; ++i) {
    const double t = rng.uniform(p.domain.lower[0], p.domain.upper[0]);
    d.t_u.push_back(t);
    d.x_u.push_back(i % 2 == 0 ? p.domain.lower[1] : p.domain.upper[1]);
    d.u.push_back(0.0);
  }
  if (noise_std > 0.0)
    for (double& value : d.u) value += noise_std * rng.normal();

  if (n_f > 0) {
    const auto pts = lhs(p.domain, n_f, rng);
    d.t_f.resize(n_f);
    d.x_f.resize(n_f);
    for (std::size_t i = 0; i < n_f; ++i) {
      d.t_f[i] = pts[2 * i];
      d.x_f[i] = pts[2 * i + 1];
    }
  }
  return d;
}

CtTrainingSet make_schrodinger_training_set(std::size_t n0, std::size_t nb,
                                            std::size_t nf, std::uint64_t seed) {
  if (n0 == 0 || nb == 0)
    throw ArgumentError("initial and boundary terms require points");
  const CtProblem p = CtProblem::schrodinger();
  Rng rng(seed);
  CtTrainingSet d;
  for (std::size_t i = 0; i < n0; ++i) {
    const double x = rng.uniform(p.domain.lower[1], p.domain.upper[1]);
    d.x0.push_back(x);
    d.u0.push_back(2.0 / std::cosh(x));
    d.v0.push_back(0.0);
  }
  for (std::size_t i = 0; i < nb; ++i)
    d.t_b.push_back(rng.uniform(p.domain.lower[0], p.domain.upper[0]));
  if (nf > 0) {
    const auto pts = lhs(p.domain, nf, rng);
    d.t_f.resize(nf);
    d.x_f.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      d.t_f[i] = pts[2 * i];
      d.x_f[i] = pts[2 * i + 1];
    }
  }
  return d;
}

}  // namespace pinn
