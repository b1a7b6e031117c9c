#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "pinn/autodiff.hpp"

namespace pinn {

/// Dense feed-forward architecture: `hidden_layers` tanh layers of width
/// `hidden_width` followed by a linear output layer.
struct MLPConfig {
  int input_dim = 1;
  int hidden_layers = 1;
  int hidden_width = 1;
  int output_dim = 1;

  /// Throws ArgumentError unless all dimensions are positive.
  void validate() const;

  /// Flat parameter count:
  /// (input·w + w) + (hidden_layers−1)·(w² + w) + (w·output + output).
  std::size_t parameter_count() const;

  bool operator==(const MLPConfig&) const = default;
};

/// Seeded Glorot-normal weights (std = sqrt(2/(fan_in+fan_out))) and zero
/// biases, flattened in layer-major, row-major order: for each layer, the
/// weight matrix rows then the bias vector.
std::vector<double> init_params(const MLPConfig& config, std::uint64_t seed);

/// Registers one bound free variable per parameter value on `graph`, in flat
/// parameter order, so objective gradients with respect to the parameters are
/// available.
std::vector<Variable> register_params(Graph& graph, std::span<const double> values);

/// Rebinds new values into previously registered parameter variables.
void bind_params(Graph& graph, std::span<const Variable> params,
                 std::span<const double> values);

/// Builds the network onto `graph` and returns the output variables. Hidden
/// activations are tanh; the output layer is affine. `params` must hold
/// exactly config.parameter_count() variables and `inputs` exactly
/// config.input_dim variables, else StructuralError.
std::vector<Variable> mlp_forward(const MLPConfig& config, std::span<const Variable> params,
                                  std::span<const Variable> inputs, Graph& graph);

/// Plain-text checkpoint: header line "mlp <input_dim> <hidden_layers>
/// <hidden_width> <output_dim>", then one parameter per line (%.17g, exact
/// round-trip).
void save_checkpoint(const std::filesystem::path& path, const MLPConfig& config,
                     std::span<const double> params);
std::pair<MLPConfig, std::vector<double>> load_checkpoint(const std::filesystem::path& path);

}  // namespace pinn
