#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pinn {

/// Implicit Runge-Kutta coefficients for Gauss-Legendre collocation,
/// generated in extended precision and rounded to 64-bit.
struct ButcherTableau {
  std::size_t q = 0;      ///< stage count
  std::vector<double> c;  ///< q nodes, strictly ascending in (0,1)
  std::vector<double> b;  ///< q quadrature weights
  std::vector<double> a;  ///< q×q stage matrix, row-major
};

/// Residuals of the defining conditions, evaluated in 64-bit arithmetic.
struct TableauReport {
  double node_symmetry = 0.0;    ///< max |c_i + c_{q+1-i} - 1|
  double weight_sum = 0.0;       ///< |Σ_j b_j - 1|
  double row_sum = 0.0;          ///< max_i |Σ_j a_ij - c_i|
  double collocation_b = 0.0;    ///< max_k |Σ_j b_j c_j^{k-1} - 1/k|
  double collocation_a = 0.0;    ///< max_{i,k} |Σ_j a_ij c_j^{k-1} - c_i^k/k|
  double pair_symmetry = 0.0;    ///< max |a_ij + a_{q+1-i,q+1-j} - b_j|
  bool nodes_ascending = false;
  bool weights_positive = false;

  /// Largest residual among the order (collocation) conditions.
  double max_order_residual() const {
    return collocation_b > collocation_a ? collocation_b : collocation_a;
  }
};

/// Roots of the degree-q Legendre polynomial mapped to (0,1), ascending.
/// Newton refinement in software extended precision from Chebyshev-based
/// starting points. Throws ArgumentError (q < 1, precision < 64 bits) or
/// NumericalError (Newton failed to converge).
std::vector<double> legendre_roots(std::size_t q, unsigned precision_bits);

/// Full Gauss-Legendre tableau. The stage matrix comes from the
/// orthogonal-polynomial expansion of the interpolatory weights (no
/// monomial system is ever solved). Throws NumericalError naming a higher
/// precision if the rounded result misses the order conditions.
ButcherTableau gauss_legendre_tableau(std::size_t q, unsigned precision_bits);

/// Evaluates all defining conditions; reports, never throws.
TableauReport verify_tableau(const ButcherTableau& t);

/// |R(z)| for the stability function R(z) = 1 + z bᵀ(I − zA)⁻¹𝟙,
/// solved by dense LU with partial pivoting.
double stability_modulus(const ButcherTableau& t, double z);

/// Text cache: "q=<q> precision_bits=<p>" header, then c, b, and the A rows
/// one per line with 17 significant digits. Round trips are bit-exact.
/// write_tableau writes atomically (temp file + rename).
void write_tableau(const ButcherTableau& t, unsigned precision_bits,
                   const std::string& path);
ButcherTableau read_tableau(const std::string& path);

/// Returns the cached tableau at <cache_dir>/gauss_q<q>_p<bits>.txt,
/// generating and writing it on a miss. Set `regenerated` to learn whether
/// a generation happened.
ButcherTableau load_or_generate(std::size_t q, unsigned precision_bits,
                                const std::string& cache_dir,
                                bool* regenerated = nullptr);

}  // namespace pinn
