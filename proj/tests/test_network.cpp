#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "oracle_helpers.hpp"
#include "pinn/autodiff.hpp"
#include "pinn/network.hpp"
#include "pinn/rng.hpp"

using pinn::ArgumentError;
using pinn::Graph;
using pinn::MLPConfig;
using pinn::ParseError;
using pinn::Rng;
using pinn::StructuralError;
using pinn::Variable;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

double eval_net(const MLPConfig& cfg, const std::vector<double>& params, double t, double x) {
  Graph g;
  auto pv = pinn::register_params(g, params);
  const Variable inputs[] = {g.input(t), g.input(x)};
  auto out = pinn::mlp_forward(cfg, pv, inputs, g);
  return g.value(out[0]);
}

}  // namespace

TEST_CASE("parameter counts match the closed-form formula") {
  const MLPConfig deep{2, 8, 20, 1};
  CHECK(deep.parameter_count() == 3021);
  // (2·100+100) + 3·(100²+100) + (100·2+2)
  const MLPConfig wide{2, 4, 100, 2};
  CHECK(wide.parameter_count() == 300 + 3 * 10100 + 202);
  CHECK(wide.parameter_count() == 30802);
  const MLPConfig tiny{1, 1, 1, 1};
  CHECK(tiny.parameter_count() == 4);
  const MLPConfig small{2, 1, 8, 1};
  CHECK(small.parameter_count() == 33);
}

TEST_CASE("invalid dimensions are rejected") {
  const MLPConfig bad_in{0, 8, 20, 1};
  const MLPConfig bad_layers{2, 0, 20, 1};
  const MLPConfig bad_width{2, 8, -3, 1};
  const MLPConfig bad_out{2, 8, 20, 0};
  CHECK_THROWS_AS(bad_in.validate(), ArgumentError);
  CHECK_THROWS_AS(bad_layers.validate(), ArgumentError);
  CHECK_THROWS_AS(bad_width.validate(), ArgumentError);
  CHECK_THROWS_AS(bad_out.validate(), ArgumentError);
}

TEST_CASE("initialization is deterministic and Glorot-scaled") {
  const MLPConfig cfg{2, 3, 16, 1};
  auto a = pinn::init_params(cfg, 1234);
  auto b = pinn::init_params(cfg, 1234);
  CHECK(a.size() == cfg.parameter_count());
  CHECK(a == b);

  auto c = pinn::init_params(cfg, 1235);
  CHECK(a != c);

  // Biases sit after each layer's weights and start at zero.
  // Layer 0: 16·2 weights then 16 biases.
  for (int i = 0; i < 16; ++i) CHECK(a[32 + i] == 0.0);

  // Weight standard deviation of the 16×16 layers ≈ sqrt(2/32).
  double sum = 0.0, sq = 0.0;
  const int n = 16 * 16;
  for (int i = 0; i < n; ++i) {
    const double w = a[48 + i];
    sum += w;
    sq += w * w;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  CHECK(std::abs(std::sqrt(var) - std::sqrt(2.0 / 32.0)) < 0.05);
}

TEST_CASE("all-zero parameters map everything to zero") {
  const MLPConfig cfg{2, 2, 8, 1};
  std::vector<double> zeros(cfg.parameter_count(), 0.0);
  Rng rng(3);
  for (int i = 0; i < 5; ++i)
    CHECK(eval_net(cfg, zeros, rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)) == 0.0);
}

TEST_CASE("hand-set single-neuron network evaluates tanh") {
  const MLPConfig cfg{2, 1, 1, 1};
  // W1 = [[1, 0]], b1 = [0], W2 = [[1]], b2 = [0]
  const std::vector<double> params = {1.0, 0.0, 0.0, 1.0, 0.0};
  const double u = eval_net(cfg, params, 0.5, 0.0);
  CHECK(std::abs(u - 0.46211715726000974) < 1e-15);
}

TEST_CASE("parameter gradients match finite differences") {
  const MLPConfig cfg{2, 1, 8, 1};
  auto params = pinn::init_params(cfg, 77);

  Graph g;
  auto pv = pinn::register_params(g, params);
  const Variable t = g.input(0.0);
  const Variable x = g.input(0.0);
  const Variable inputs[] = {t, x};
  auto out = pinn::mlp_forward(cfg, pv, inputs, g);
  auto grads = g.grad(out[0], pv);

  Rng rng(78);
  for (int pt = 0; pt < 10; ++pt) {
    const double t0 = rng.uniform(0.0, 1.0);
    const double x0 = rng.uniform(-1.0, 1.0);
    g.bind(t, t0);
    g.bind(x, x0);
    g.forward();
    std::vector<double> ad(pv.size());
    for (std::size_t k = 0; k < pv.size(); ++k) ad[k] = g.value(grads[k]);

    for (std::size_t k = 0; k < pv.size(); ++k) {
      const double h = 1e-6;
      auto perturbed = params;
      perturbed[k] = params[k] + h;
      const double up = eval_net(cfg, perturbed, t0, x0);
      perturbed[k] = params[k] - h;
      const double dn = eval_net(cfg, perturbed, t0, x0);
      const double fd = (up - dn) / (2.0 * h);
      CAPTURE(pt);
      CAPTURE(k);
      if (std::abs(fd) > 1e-7) CHECK(oracle::rel_err(ad[k], fd) < 1e-5);
      else CHECK(std::abs(ad[k] - fd) < 1e-7);
    }
  }
}

TEST_CASE("tanh symmetry with zero biases") {
  // One hidden layer, zero biases: u(-x) = -u(x), and flipping the sign of
  // every weight leaves the output unchanged (the two sign flips cancel).
  const MLPConfig cfg1{1, 1, 6, 1};
  auto p1 = pinn::init_params(cfg1, 5);
  for (int i = 6; i < 12; ++i) p1[i] = 0.0;  // hidden biases (already zero)
  p1[cfg1.parameter_count() - 1] = 0.0;      // output bias (already zero)

  auto flipped = p1;
  for (auto& w : flipped) w = -w;

  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    Graph g;
    auto pv = pinn::register_params(g, p1);
    const Variable in[] = {g.input(x)};
    auto out = pinn::mlp_forward(cfg1, pv, in, g);

    Graph g2;
    auto pv2 = pinn::register_params(g2, p1);
    const Variable in2[] = {g2.input(-x)};
    auto out2 = pinn::mlp_forward(cfg1, pv2, in2, g2);
    CHECK(std::abs(g.value(out[0]) + g2.value(out2[0])) < 1e-12);

    Graph g3;
    auto pv3 = pinn::register_params(g3, flipped);
    const Variable in3[] = {g3.input(x)};
    auto out3 = pinn::mlp_forward(cfg1, pv3, in3, g3);
    CHECK(std::abs(g.value(out[0]) - g3.value(out3[0])) < 1e-12);
  }

  // With two hidden layers the all-weight flip negates the output instead.
  const MLPConfig cfg2{1, 2, 6, 1};
  auto q = pinn::init_params(cfg2, 7);
  auto qf = q;
  for (auto& w : qf) w = -w;
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    Graph ga, gb;
    auto pa = pinn::register_params(ga, q);
    auto pb = pinn::register_params(gb, qf);
    const Variable ia[] = {ga.input(x)};
    const Variable ib[] = {gb.input(x)};
    auto oa = pinn::mlp_forward(cfg2, pa, ia, ga);
    auto ob = pinn::mlp_forward(cfg2, pb, ib, gb);
    CHECK(std::abs(ga.value(oa[0]) + gb.value(ob[0])) < 1e-12);
  }
}

TEST_CASE("forward is a pure function of parameters and inputs") {
  const MLPConfig cfg{2, 2, 10, 2};
  auto params = pinn::init_params(cfg, 11);
  Graph ga, gb;
  auto pa = pinn::register_params(ga, params);
  auto pb = pinn::register_params(gb, params);
  const Variable ia[] = {ga.input(0.3), ga.input(-0.7)};
  const Variable ib[] = {gb.input(0.3), gb.input(-0.7)};
  auto oa = pinn::mlp_forward(cfg, pa, ia, ga);
  auto ob = pinn::mlp_forward(cfg, pb, ib, gb);
  REQUIRE(oa.size() == 2);
  for (int k = 0; k < 2; ++k) CHECK(ga.value(oa[k]) == gb.value(ob[k]));
}

TEST_CASE("dimension mismatches are structural errors") {
  const MLPConfig cfg{2, 1, 4, 1};
  auto params = pinn::init_params(cfg, 1);
  Graph g;
  auto pv = pinn::register_params(g, params);
  const Variable one_input[] = {g.input(0.0)};
  CHECK_THROWS_AS(pinn::mlp_forward(cfg, pv, one_input, g), StructuralError);

  const Variable two_inputs[] = {g.input(0.0), g.input(0.0)};
  std::span<const Variable> short_params(pv.data(), pv.size() - 1);
  CHECK_THROWS_AS(pinn::mlp_forward(cfg, short_params, two_inputs, g), StructuralError);
}

TEST_CASE("checkpoints round-trip exactly") {
  const MLPConfig cfg{2, 3, 12, 2};
  auto params = pinn::init_params(cfg, 99);
  const auto path = temp_file("pinn_test_checkpoint.txt");
  pinn::save_checkpoint(path, cfg, params);
  auto [cfg2, params2] = pinn::load_checkpoint(path);
  CHECK(cfg2 == cfg);
  REQUIRE(params2.size() == params.size());
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params2[i] == params[i]);
  std::filesystem::remove(path);
}

TEST_CASE("malformed checkpoints carry line information") {
  const auto path = temp_file("pinn_test_checkpoint_bad.txt");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("mlp 2 1 2 1\n1.0\nnot-a-number\n", f);
    std::fclose(f);
  }
  try {
    pinn::load_checkpoint(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::filesystem::remove(path);

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("mlp 2 1 2 1\n1.0\n2.0\n", f);  // needs 9 parameters
    std::fclose(f);
  }
  CHECK_THROWS_AS(pinn::load_checkpoint(path), ParseError);
  std::filesystem::remove(path);
}
