#include "pinn/refsolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <vector>

#include "pinn/errors.hpp"
#include "pinn/fft.hpp"

namespace pinn {
namespace {

using cd = std::complex<double>;

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (weight e^{-z²}) for the heat-kernel integrals.

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.
void ql_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd)
          break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw NumericalError("tridiagonal eigenvalue sweep stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double bb = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * bb;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - bb;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
}

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes from the Hermite Jacobi matrix; weights from the Christoffel
/// identity 1/w_i = Σ_{k<n} p_k(x_i)² with orthonormal Hermite p_k.
Quadrature gauss_hermite(std::size_t n) {
  std::vector<double> d(n, 0.0), e(n, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    e[k] = std::sqrt(0.5 * static_cast<double>(k));
  ql_eigenvalues(d, e);

  Quadrature quad;
  quad.nodes = d;
  quad.weights.resize(n);
  const double p0 = std::pow(std::numbers::pi, -0.25);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d[i];
    double prev = 0.0, cur = p0, sum = p0 * p0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double kk = static_cast<double>(k);
      const double next = (x * cur * std::sqrt(2.0 / (kk + 1.0))) -
                          prev * std::sqrt(kk / (kk + 1.0));
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    quad.weights[i] = 1.0 / sum;
  }
  return quad;
}

const Quadrature& hermite_rule(std::size_t n) {
  static const Quadrature rule100 = gauss_hermite(100);
  static const Quadrature rule254 = gauss_hermite(254);
  if (n == 100) return rule100;
  if (n == 254) return rule254;
  throw ArgumentError("unsupported Hermite node count");
}

// ---------------------------------------------------------------------------
// Pseudospectral plumbing shared by the two integrators.

struct SpectralWorkspace {
  SpectralWorkspace(const SpectralConfig& cfg)
      : n(cfg.modes),
        plan(cfg.modes),
        k(fft_wavenumbers(cfg.modes, cfg.domain_length)),
        scratch(cfg.modes) {}

  std::size_t n;
  Fft plan;
  std::vector<double> k;
  std::vector<cd> scratch;

  /// 2/3-rule dealiasing applied in place to a physical-space array.
  void dealias(std::vector<cd>& phys) {
    plan.forward(phys);
    const std::size_t cut = n / 3;  // keep |mode index| ≤ n/3
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = std::min(i, n - i);
      if (m > cut) phys[i] = {0.0, 0.0};
    }
    plan.inverse(phys);
  }
};

std::vector<double> snapshot_times(std::size_t count, double t_final) {
  std::vector<double> t(count);
  for (std::size_t m = 0; m < count; ++m)
    t[m] = t_final * static_cast<double>(m) / static_cast<double>(count - 1);
  t.back() = t_final;
  return t;
}

std::vector<double> space_grid(const SpectralConfig& cfg) {
  std::vector<double> x(cfg.modes);
  const double h = cfg.domain_length / static_cast<double>(cfg.modes);
  for (std::size_t j = 0; j < cfg.modes; ++j)
    x[j] = -0.5 * cfg.domain_length + h * static_cast<double>(j);
  return x;
}

void check_amplitude(const std::vector<cd>& state, const char* what) {
  for (const auto& v : state)
    if (!(std::abs(v) < 1e6))
      throw NumericalError(std::string(what) + " solution blew up");
}

}  // namespace

void SpectralConfig::validate() const {
  if (modes == 0 || (modes & (modes - 1)) != 0)
    throw ArgumentError("modes must be a power of two");
  if (!(time_step > 0.0)) throw ArgumentError("time step must be positive");
  if (!(domain_length > 0.0))
    throw ArgumentError("domain length must be positive");
  if (snapshots < 2) throw ArgumentError("need at least two snapshots");
}

double burgers_exact(double t, double x, double nu) {
  if (!(t >= 0.0)) throw ArgumentError("time must be non-negative");
  if (!(nu > 0.0)) throw ArgumentError("viscosity must be positive");
  const double pi = std::numbers::pi;
  if (t == 0.0) return -std::sin(pi * x);

  const std::size_t n_nodes = (t * nu < 1e-4) ? 254 : 100;
  const Quadrature& quad = hermite_rule(n_nodes);
  const double s = 2.0 * std::sqrt(nu * t);
  const double inv2pinu = 1.0 / (2.0 * pi * nu);

  // u = -Σ w sin(π y) G / Σ w G with y = x - s z and G = e^{-cos(π y)/(2πν)},
  // G factored by its largest exponent to keep the quotient well scaled.
  const std::size_t m = quad.nodes.size();
  double max_exp = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double y = x - s * quad.nodes[i];
    const double ex = -std::cos(pi * y) * inv2pinu;
    if (ex > max_exp) max_exp = ex;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double y = x - s * quad.nodes[i];
    const double g = std::exp(-std::cos(pi * y) * inv2pinu - max_exp);
    num += quad.weights[i] * std::sin(pi * y) * g;
    den += quad.weights[i] * g;
  }
  if (!(den > 1e-300))
    throw NumericalError("heat-kernel quadrature denominator vanished");
  return -num / den;
}

SolutionGrid nls_spectral(const SpectralConfig& config, double t_final) {
  config.validate();
  if (!(t_final > 0.0)) throw ArgumentError("final time must be positive");
  if (config.integrator != SpectralIntegrator::kRk4)
    throw ArgumentError("the Schrödinger reference uses the rk4 integrator");

  SpectralWorkspace ws(config);
  const std::size_t n = ws.n;
  const auto x = space_grid(config);

  std::vector<cd> h(n);
  for (std::size_t j = 0; j < n; ++j)
    h[j] = {2.0 / std::cosh(x[j]), 0.0};

  // i h_t + ½ h_xx + |h|² h = 0  ⇒  h_t = i(½ h_xx + |h|² h).
  std::vector<cd> lap(n), nl(n);
  auto rhs = [&](const std::vector<cd>& state, std::vector<cd>& out) {
    lap = state;
    ws.plan.forward(lap);
    for (std::size_t j = 0; j < n; ++j) lap[j] *= -ws.k[j] * ws.k[j];
    ws.plan.inverse(lap);
    for (std::size_t j = 0; j < n; ++j) nl[j] = std::norm(state[j]) * state[j];
    ws.dealias(nl);
    const cd I{0.0, 1.0};
    for (std::size_t j = 0; j < n; ++j)
      out[j] = I * (0.5 * lap[j] + nl[j]);
  };

  std::vector<cd> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rk4_step = [&](double dt) {
    rhs(h, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = h[j] + 0.5 * dt * k1[j];
    rhs(tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = h[j] + 0.5 * dt * k2[j];
    rhs(tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = h[j] + dt * k3[j];
    rhs(tmp, k4);
    for (std::size_t j = 0; j < n; ++j)
      h[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  };

  SolutionGrid grid;
  grid.t = snapshot_times(config.snapshots, t_final);
  grid.x = x;
  grid.components = {"u", "v"};
  grid.values.assign(2, std::vector<double>(grid.t.size() * n));

  double t_now = 0.0;
  for (std::size_t m = 0; m < grid.t.size(); ++m) {
    while (t_now < grid.t[m]) {
      double dt = config.time_step;
      if (dt >= grid.t[m] - t_now) {  // shorten the last step to land exactly
        dt = grid.t[m] - t_now;
        t_now = grid.t[m];
      } else {
        t_now += dt;
      }
      rk4_step(dt);
    }
    check_amplitude(h, "Schrödinger");
    for (std::size_t j = 0; j < n; ++j) {
      grid.values[0][m * n + j] = h[j].real();
      grid.values[1][m * n + j] = h[j].imag();
    }
  }
  return grid;
}

SolutionGrid allen_cahn_spectral(const SpectralConfig& config, double t_final) {
  config.validate();
  if (!(t_final > 0.0)) throw ArgumentError("final time must be positive");

  SpectralWorkspace ws(config);
  const std::size_t n = ws.n;
  const auto x = space_grid(config);
  const double pi = std::numbers::pi;

  std::vector<cd> u(n);
  for (std::size_t j = 0; j < n; ++j)
    u[j] = {x[j] * x[j] * std::cos(pi * x[j]), 0.0};

  // u_t = L u + N(u): L = 0.0001 ∂_xx + 5 (diagonal in Fourier space),
  // N(u) = -5 u³ (dealiased).
  std::vector<double> lin(n);
  for (std::size_t j = 0; j < n; ++j)
    lin[j] = -1e-4 * ws.k[j] * ws.k[j] + 5.0;

  std::vector<cd> nl(n);
  auto nonlinear_hat = [&](const std::vector<cd>& phys, std::vector<cd>& out) {
    for (std::size_t j = 0; j < n; ++j) {
      const double re = phys[j].real();
      out[j] = {-5.0 * re * re * re, 0.0};
    }
    ws.plan.forward(out);
    const std::size_t cut = n / 3;
    for (std::size_t j = 0; j < n; ++j)
      if (std::min(j, n - j) > cut) out[j] = {0.0, 0.0};
  };

  SolutionGrid grid;
  grid.t = snapshot_times(config.snapshots, t_final);
  grid.x = x;
  grid.components = {"u"};
  grid.values.assign(1, std::vector<double>(grid.t.size() * n));

  if (config.integrator == SpectralIntegrator::kRk4) {
    std::vector<cd> k1(n), k2(n), k3(n), k4(n), tmp(n), lap(n);
    auto rhs = [&](const std::vector<cd>& state, std::vector<cd>& out) {
      lap = state;
      ws.plan.forward(lap);
      for (std::size_t j = 0; j < n; ++j) lap[j] *= lin[j];
      nonlinear_hat(state, out);
      for (std::size_t j = 0; j < n; ++j) out[j] += lap[j];
      ws.plan.inverse(out);
    };
    double t_now = 0.0;
    for (std::size_t m = 0; m < grid.t.size(); ++m) {
      while (t_now < grid.t[m]) {
        double dt = config.time_step;
        if (dt >= grid.t[m] - t_now) {
          dt = grid.t[m] - t_now;
          t_now = grid.t[m];
        } else {
          t_now += dt;
        }
        rhs(u, k1);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * k1[j];
        rhs(tmp, k2);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * k2[j];
        rhs(tmp, k3);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + dt * k3[j];
        rhs(tmp, k4);
        for (std::size_t j = 0; j < n; ++j) {
          u[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
          u[j] = {u[j].real(), 0.0};
        }
      }
      check_amplitude(u, "Allen-Cahn");
      for (std::size_t j = 0; j < n; ++j)
        grid.values[0][m * n + j] = u[j].real();
    }
    return grid;
  }

  // ETDRK4 with coefficients by 32-point contour averaging around each
  // linear eigenvalue, following the standard stable evaluation.
  auto etdrk4_tables = [&](double dt, std::vector<double>& E,
                           std::vector<double>& E2, std::vector<double>& Q,
                           std::vector<double>& f1, std::vector<double>& f2,
                           std::vector<double>& f3) {
    const int points = 32;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = dt * lin[j];
      E[j] = std::exp(z);
      E2[j] = std::exp(0.5 * z);
      cd q{0.0, 0.0}, a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0};
      for (int p = 0; p < points; ++p) {
        const double theta = pi * (static_cast<double>(p) + 0.5) /
                             static_cast<double>(points);
        const cd zz = cd(z, 0.0) + std::polar(1.0, theta);
        const cd ez = std::exp(zz);
        const cd z2 = zz * zz, z3 = zz * zz * zz;
        q += (std::exp(0.5 * zz) - 1.0) / zz;
        a += (-4.0 - zz + ez * (4.0 - 3.0 * zz + z2)) / z3;
        b += (2.0 + zz + ez * (-2.0 + zz)) / z3;
        c += (-4.0 - 3.0 * zz - z2 + ez * (4.0 - zz)) / z3;
      }
      const double scale = dt / static_cast<double>(points);
      Q[j] = scale * q.real();
      f1[j] = scale * a.real();
      f2[j] = scale * b.real();
      f3[j] = scale * c.real();
    }
  };

  std::vector<double> E(n), E2(n), Q(n), f1(n), f2(n), f3(n);
  double table_dt = -1.0;

  std::vector<cd> v = u;
  ws.plan.forward(v);
  std::vector<cd> nu_hat(n), na_hat(n), nb_hat(n), nc_hat(n), av(n), bv(n),
      cv(n), phys(n);
  auto to_phys = [&](const std::vector<cd>& hat, std::vector<cd>& out) {
    out = hat;
    ws.plan.inverse(out);
    for (auto& w : out) w = {w.real(), 0.0};
  };

  auto etdrk4_step = [&](double dt) {
    if (dt != table_dt) {
      etdrk4_tables(dt, E, E2, Q, f1, f2, f3);
      table_dt = dt;
    }
    to_phys(v, phys);
    nonlinear_hat(phys, nu_hat);
    for (std::size_t j = 0; j < n; ++j) av[j] = E2[j] * v[j] + Q[j] * nu_hat[j];
    to_phys(av, phys);
    nonlinear_hat(phys, na_hat);
    for (std::size_t j = 0; j < n; ++j) bv[j] = E2[j] * v[j] + Q[j] * na_hat[j];
    to_phys(bv, phys);
    nonlinear_hat(phys, nb_hat);
    for (std::size_t j = 0; j < n; ++j)
      cv[j] = E2[j] * av[j] + Q[j] * (2.0 * nb_hat[j] - nu_hat[j]);
    to_phys(cv, phys);
    nonlinear_hat(phys, nc_hat);
    for (std::size_t j = 0; j < n; ++j)
      v[j] = E[j] * v[j] + f1[j] * nu_hat[j] +
             2.0 * f2[j] * (na_hat[j] + nb_hat[j]) + f3[j] * nc_hat[j];
  };

  double t_now = 0.0;
  for (std::size_t m = 0; m < grid.t.size(); ++m) {
    while (t_now < grid.t[m]) {
      double dt = config.time_step;
      if (dt >= grid.t[m] - t_now) {
        dt = grid.t[m] - t_now;
        t_now = grid.t[m];
      } else {
        t_now += dt;
      }
      etdrk4_step(dt);
    }
    if (m == 0) {
      // Report the initial row from the physical initial condition so it is
      // exact rather than a transform round trip of it.
      for (std::size_t j = 0; j < n; ++j)
        grid.values[0][j] = u[j].real();
      continue;
    }
    to_phys(v, phys);
    check_amplitude(phys, "Allen-Cahn");
    for (std::size_t j = 0; j < n; ++j)
      grid.values[0][m * n + j] = phys[j].real();
  }
  return grid;
}

std::string reference_cache_key(const std::string& problem,
                                const SpectralConfig& config, double t_final) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "|%zu|%.17g|%d|%.17g|%zu|%.17g",
                config.modes, config.time_step,
                static_cast<int>(config.integrator), config.domain_length,
                config.snapshots, t_final);
  std::string text = problem + buf;
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64-bit
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace pinn
