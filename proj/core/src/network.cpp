#include "pinn/network.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "pinn/errors.hpp"
#include "pinn/rng.hpp"

namespace pinn {

namespace {

/// Layer sizes including input and output: d_0 .. d_{hidden_layers+1}.
std::vector<int> layer_dims(const MLPConfig& c) {
  std::vector<int> dims;
  dims.reserve(static_cast<std::size_t>(c.hidden_layers) + 2);
  dims.push_back(c.input_dim);
  for (int l = 0; l < c.hidden_layers; ++l) dims.push_back(c.hidden_width);
  dims.push_back(c.output_dim);
  return dims;
}

}  // namespace

void MLPConfig::validate() const {
  if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1 || output_dim < 1)
    throw ArgumentError("network dimensions must be positive");
}

std::size_t MLPConfig::parameter_count() const {
  validate();
  const std::size_t w = static_cast<std::size_t>(hidden_width);
  const std::size_t in = static_cast<std::size_t>(input_dim);
  const std::size_t out = static_cast<std::size_t>(output_dim);
  const std::size_t hl = static_cast<std::size_t>(hidden_layers);
  return (in * w + w) + (hl - 1) * (w * w + w) + (w * out + out);
}

std::vector<double> init_params(const MLPConfig& config, std::uint64_t seed) {
  config.validate();
  const std::vector<int> dims = layer_dims(config);
  std::vector<double> params;
  params.reserve(config.parameter_count());
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double std_dev = std::sqrt(2.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) params.push_back(std_dev * rng.normal());
    for (int i = 0; i < fan_out; ++i) params.push_back(0.0);
  }
  return params;
}

std::vector<Variable> register_params(Graph& graph, std::span<const double> values) {
  std::vector<Variable> vars;
  vars.reserve(values.size());
  for (double v : values) vars.push_back(graph.input(v));
  return vars;
}

void bind_params(Graph& graph, std::span<const Variable> params,
                 std::span<const double> values) {
  if (params.size() != values.size())
    throw StructuralError("parameter variable and value counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) graph.bind(params[i], values[i]);
}

std::vector<Variable> mlp_forward(const MLPConfig& config, std::span<const Variable> params,
                                  std::span<const Variable> inputs, Graph& graph) {
  config.validate();
  if (inputs.size() != static_cast<std::size_t>(config.input_dim))
    throw StructuralError("input count does not match network input_dim");
  if (params.size() != config.parameter_count())
    throw StructuralError("parameter count does not match network architecture");

  const std::vector<int> dims = layer_dims(config);
  std::vector<Variable> activ(inputs.begin(), inputs.end());
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const std::size_t weights = p;
    const std::size_t biases = p + static_cast<std::size_t>(out) * in;
    std::vector<Variable> next(out);
    for (int i = 0; i < out; ++i) {
      Variable acc = params[biases + i];
      for (int j = 0; j < in; ++j)
        acc = graph.fma(params[weights + static_cast<std::size_t>(i) * in + j], activ[j], acc);
      next[i] = l + 2 < dims.size() ? graph.tanh(acc) : acc;
    }
    activ = std::move(next);
    p = biases + out;
  }
  return activ;
}

void save_checkpoint(const std::filesystem::path& path, const MLPConfig& config,
                     std::span<const double> params) {
  config.validate();
  if (params.size() != config.parameter_count())
    throw ArgumentError("checkpoint parameter count does not match architecture");
  std::ofstream out(path);
  if (!out) throw Error("cannot open checkpoint file for writing: " + path.string());
  out << "mlp " << config.input_dim << ' ' << config.hidden_layers << ' '
      << config.hidden_width << ' ' << config.output_dim << '\n';
  char buf[64];
  for (double v : params) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  if (!out.flush()) throw Error("failed writing checkpoint: " + path.string());
}

std::pair<MLPConfig, std::vector<double>> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty checkpoint file", 1);

  MLPConfig config;
  {
    char tag[8] = {};
    if (std::sscanf(line.c_str(), "%7s %d %d %d %d", tag, &config.input_dim,
                    &config.hidden_layers, &config.hidden_width, &config.output_dim) != 5 ||
        std::strcmp(tag, "mlp") != 0)
      throw ParseError("malformed checkpoint header", 1);
  }
  try {
    config.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), 1);
  }

  const std::size_t want = config.parameter_count();
  std::vector<double> params;
  params.reserve(want);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw ParseError("malformed parameter value", line_no);
    if (params.size() == want) throw ParseError("extra parameter values in checkpoint", line_no);
    params.push_back(v);
  }
  if (params.size() != want)
    throw ParseError("checkpoint holds " + std::to_string(params.size()) +
                         " parameters, architecture needs " + std::to_string(want),
                     line_no);
  return {config, std::move(params)};
}

}  // namespace pinn
