#pragma once

#include <cstddef>
#include <string>

#include "pinn/metrics_io.hpp"

namespace pinn {

enum class SpectralIntegrator { kRk4, kEtdrk4 };

/// Settings for the Fourier pseudospectral reference integrators.
struct SpectralConfig {
  std::size_t modes = 256;         ///< grid points; power of two
  double time_step = 1e-4;
  SpectralIntegrator integrator = SpectralIntegrator::kRk4;
  double domain_length = 10.0;     ///< periodic cell [-L/2, L/2)
  std::size_t snapshots = 201;     ///< uniform sample times incl. both ends

  void validate() const;  ///< throws ArgumentError
};

/// Viscous Burgers on [-1,1] with u(0,x) = -sin(πx) and zero boundaries:
/// the closed-form quotient of heat-kernel integrals, evaluated by
/// Gauss-Hermite quadrature (100 nodes, 254 when t·ν < 1e-4). t=0 returns
/// -sin(πx) exactly. Throws NumericalError on quadrature breakdown.
double burgers_exact(double t, double x, double nu);

/// Cubic Schrödinger i h_t + ½ h_xx + |h|² h = 0 on [-5,5) periodic from
/// h(0,x) = 2 sech(x). Components "u" (real) and "v" (imaginary part) on
/// the snapshots × grid lattice. Throws NumericalError on blow-up.
SolutionGrid nls_spectral(const SpectralConfig& config, double t_final);

/// Allen-Cahn u_t = 0.0001 u_xx + 5u - 5u³ on [-1,1) periodic from
/// u(0,x) = x² cos(πx). Component "u". Throws NumericalError on blow-up.
SolutionGrid allen_cahn_spectral(const SpectralConfig& config, double t_final);

/// Stable hexadecimal content key for caching reference grids on disk.
std::string reference_cache_key(const std::string& problem,
                                const SpectralConfig& config, double t_final);

}  // namespace pinn
