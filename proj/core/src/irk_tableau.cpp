#include "pinn/irk_tableau.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "pinn/bigfloat.hpp"
#include "pinn/errors.hpp"

namespace pinn {
namespace {

/// P_q(t) and P'_q(t) by the three-term recurrence, t on (-1,1).
void legendre_eval(std::size_t q, const BigFloat& t, BigFloat& p, BigFloat& dp) {
  const unsigned prec = t.precision();
  BigFloat pm1(1L, prec);  // P_0
  if (q == 0) {
    p = pm1;
    dp = BigFloat(0L, prec);
    return;
  }
  BigFloat pk = t;  // P_1
  for (std::size_t m = 1; m < q; ++m) {
    // (m+1) P_{m+1} = (2m+1) t P_m − m P_{m−1}
    BigFloat next = (BigFloat(static_cast<long>(2 * m + 1), prec) * t * pk -
                     BigFloat(static_cast<long>(m), prec) * pm1) /
                    BigFloat(static_cast<long>(m + 1), prec);
    pm1 = pk;
    pk = next;
  }
  p = pk;
  // (1 − t²) P'_q = q (P_{q−1} − t P_q)
  const BigFloat one(1L, prec);
  dp = BigFloat(static_cast<long>(q), prec) * (pm1 - t * pk) / (one - t * t);
}

/// All P_m(t) for m = 0..q, stored ascending.
std::vector<BigFloat> legendre_sequence(std::size_t q, const BigFloat& t) {
  const unsigned prec = t.precision();
  std::vector<BigFloat> p;
  p.reserve(q + 1);
  p.emplace_back(1L, prec);
  if (q == 0) return p;
  p.push_back(t);
  for (std::size_t m = 1; m < q; ++m)
    p.push_back((BigFloat(static_cast<long>(2 * m + 1), prec) * t * p[m] -
                 BigFloat(static_cast<long>(m), prec) * p[m - 1]) /
                BigFloat(static_cast<long>(m + 1), prec));
  return p;
}

/// Newton-refined root of P_q from a double starting point.
BigFloat refine_root(std::size_t q, double guess, unsigned prec) {
  BigFloat t(guess, prec);
  // Converged when the Newton step is below the working precision's scale.
  const BigFloat tol(std::ldexp(1.0, -static_cast<int>(prec) + 4), prec);
  BigFloat p(prec), dp(prec);
  for (int it = 0; it < 100; ++it) {
    legendre_eval(q, t, p, dp);
    BigFloat step = p / dp;
    t = t - step;
    if (abs(step) < tol) return t;
  }
  throw NumericalError("Legendre root refinement did not converge");
}

struct ExtendedTableau {
  std::vector<BigFloat> t;  ///< roots on (-1,1), ascending
  std::vector<BigFloat> c;  ///< (1+t)/2
  std::vector<BigFloat> b;  ///< weights on [0,1]
};

ExtendedTableau nodes_and_weights(std::size_t q, unsigned prec) {
  if (q < 1) throw ArgumentError("stage count must be at least 1");
  if (prec < 64) throw ArgumentError("precision must be at least 64 bits");
  ExtendedTableau ext;
  const BigFloat one(1L, prec), half(0.5, prec);
  for (std::size_t i = 1; i <= q; ++i) {
    // Chebyshev-based starting point; index chosen so roots come out ascending.
    const double theta = std::numbers::pi *
                         (static_cast<double>(q - i) + 0.75) /
                         (static_cast<double>(q) + 0.5);
    BigFloat t = (q % 2 == 1 && i == (q + 1) / 2)
                     ? BigFloat(0L, prec)  // middle root is exactly zero
                     : refine_root(q, std::cos(theta), prec);
    BigFloat p(prec), dp(prec);
    legendre_eval(q, t, p, dp);
    // Gauss-Legendre weight on [0,1]: 1 / ((1 − t²) P'_q(t)²).
    BigFloat w = one / ((one - t * t) * dp * dp);
    ext.c.push_back(half * (one + t));
    ext.b.push_back(std::move(w));
    ext.t.push_back(std::move(t));
  }
  return ext;
}

/// Round to doubles, enforcing the exact mirror symmetries of Gauss nodes.
void round_symmetric(const ExtendedTableau& ext, ButcherTableau& out) {
  const std::size_t q = ext.c.size();
  out.c.assign(q, 0.0);
  out.b.assign(q, 0.0);
  for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
    const double ci = ext.c[i].to_double();
    out.c[i] = ci;
    out.c[q - 1 - i] = 1.0 - ci;  // exact for ci in [0.5, 1] mirrored below
    const double bi = ext.b[i].to_double();
    out.b[i] = bi;
    out.b[q - 1 - i] = bi;
  }
  if (q % 2 == 1) out.c[q / 2] = 0.5;
}

}  // namespace

std::vector<double> legendre_roots(std::size_t q, unsigned precision_bits) {
  ExtendedTableau ext = nodes_and_weights(q, precision_bits);
  ButcherTableau rounded;
  round_symmetric(ext, rounded);
  return rounded.c;
}

ButcherTableau gauss_legendre_tableau(std::size_t q, unsigned precision_bits) {
  const unsigned prec = precision_bits;
  ExtendedTableau ext = nodes_and_weights(q, prec);

  // Interpolatory stage matrix via the shifted-Legendre expansion of the
  // Lagrange basis: a_ij = b_j Σ_{m<q} (2m+1) P_m(t_j) ∫_0^{c_i} P̃_m, with
  // ∫_0^{c} P̃_m = (P_{m+1}(t) − P_{m−1}(t)) / (2(2m+1)) for m ≥ 1 (t = 2c−1)
  // and ∫_0^{c} P̃_0 = c. Gauss quadrature exactness makes the expansion
  // coefficients closed-form, so no linear system is involved.
  std::vector<std::vector<BigFloat>> pseq;
  pseq.reserve(q);
  for (std::size_t j = 0; j < q; ++j)
    pseq.push_back(legendre_sequence(q, ext.t[j]));

  ButcherTableau out;
  out.q = q;
  round_symmetric(ext, out);
  out.a.assign(q * q, 0.0);
  const BigFloat half(0.5, prec);
  for (std::size_t i = 0; i < q; ++i) {
    // I_m = ∫_0^{c_i} P̃_m for m = 0..q−1.
    std::vector<BigFloat> integral;
    integral.reserve(q);
    integral.push_back(ext.c[i]);
    for (std::size_t m = 1; m < q; ++m)
      integral.push_back((pseq[i][m + 1] - pseq[i][m - 1]) /
                         BigFloat(static_cast<long>(2 * (2 * m + 1)), prec));
    for (std::size_t j = 0; j < q; ++j) {
      BigFloat sum(0L, prec);
      for (std::size_t m = 0; m < q; ++m)
        sum = sum + BigFloat(static_cast<long>(2 * m + 1), prec) *
                        pseq[j][m] * integral[m];
      out.a[i * q + j] = (ext.b[j] * sum).to_double();
    }
  }

  const TableauReport report = verify_tableau(out);
  const double tol = 1e-10 * static_cast<double>(q);
  if (!(report.max_order_residual() <= tol))
    throw NumericalError(
        "order conditions missed at q=" + std::to_string(q) + " (residual " +
        std::to_string(report.max_order_residual()) +
        "); retry with higher precision_bits");
  return out;
}

TableauReport verify_tableau(const ButcherTableau& t) {
  TableauReport r;
  const std::size_t q = t.q;
  if (q == 0 || t.c.size() != q || t.b.size() != q || t.a.size() != q * q)
    return r;  // shape mismatch: report stays in its failed default state

  r.nodes_ascending = true;
  for (std::size_t i = 0; i < q; ++i) {
    if (t.c[i] <= 0.0 || t.c[i] >= 1.0 || (i > 0 && t.c[i] <= t.c[i - 1]))
      r.nodes_ascending = false;
  }
  r.weights_positive = true;
  double bsum = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    if (!(t.b[j] > 0.0)) r.weights_positive = false;
    bsum += t.b[j];
  }
  r.weight_sum = std::abs(bsum - 1.0);

  for (std::size_t i = 0; i < q; ++i) {
    const double sym = std::abs(t.c[i] + t.c[q - 1 - i] - 1.0);
    if (sym > r.node_symmetry) r.node_symmetry = sym;
    double asum = 0.0;
    for (std::size_t j = 0; j < q; ++j) asum += t.a[i * q + j];
    const double rs = std::abs(asum - t.c[i]);
    if (rs > r.row_sum) r.row_sum = rs;
    for (std::size_t j = 0; j < q; ++j) {
      const double pair = std::abs(t.a[i * q + j] +
                                   t.a[(q - 1 - i) * q + (q - 1 - j)] - t.b[j]);
      if (pair > r.pair_symmetry) r.pair_symmetry = pair;
    }
  }

  // Collocation conditions for k = 1..q with running powers of the nodes.
  std::vector<double> pow_c(q, 1.0);  // c_j^{k-1}
  for (std::size_t k = 1; k <= q; ++k) {
    double bres = 0.0;
    for (std::size_t j = 0; j < q; ++j) bres += t.b[j] * pow_c[j];
    bres -= 1.0 / static_cast<double>(k);
    if (std::abs(bres) > r.collocation_b) r.collocation_b = std::abs(bres);
    for (std::size_t i = 0; i < q; ++i) {
      double ares = 0.0;
      for (std::size_t j = 0; j < q; ++j) ares += t.a[i * q + j] * pow_c[j];
      ares -= std::pow(t.c[i], static_cast<double>(k)) / static_cast<double>(k);
      if (std::abs(ares) > r.collocation_a) r.collocation_a = std::abs(ares);
    }
    for (std::size_t j = 0; j < q; ++j) pow_c[j] *= t.c[j];
  }
  return r;
}

double stability_modulus(const ButcherTableau& t, double z) {
  const std::size_t q = t.q;
  // Solve (I − zA) y = 1 by LU with partial pivoting.
  std::vector<double> m(q * q);
  std::vector<double> y(q, 1.0);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j)
      m[i * q + j] = (i == j ? 1.0 : 0.0) - z * t.a[i * q + j];
  for (std::size_t col = 0; col < q; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < q; ++i)
      if (std::abs(m[i * q + col]) > std::abs(m[pivot * q + col])) pivot = i;
    if (m[pivot * q + col] == 0.0)
      throw NumericalError("singular stability system");
    if (pivot != col) {
      for (std::size_t j = col; j < q; ++j)
        std::swap(m[pivot * q + j], m[col * q + j]);
      std::swap(y[pivot], y[col]);
    }
    for (std::size_t i = col + 1; i < q; ++i) {
      const double f = m[i * q + col] / m[col * q + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < q; ++j) m[i * q + j] -= f * m[col * q + j];
      y[i] -= f * y[col];
    }
  }
  for (std::size_t i = q; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < q; ++j) s -= m[i * q + j] * y[j];
    y[i] = s / m[i * q + i];
  }
  double bty = 0.0;
  for (std::size_t j = 0; j < q; ++j) bty += t.b[j] * y[j];
  return std::abs(1.0 + z * bty);
}

namespace {

void append_row(std::string& out, const double* v, std::size_t n) {
  char buf[40];
  for (std::size_t j = 0; j < n; ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[j]);
    if (j) out += ' ';
    out += buf;
  }
  out += '\n';
}

std::vector<double> parse_row(const std::string& line, std::size_t expect,
                              long line_no) {
  std::istringstream in(line);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof())
    throw ParseError("malformed number in tableau row", line_no);
  if (v.size() != expect)
    throw ParseError("expected " + std::to_string(expect) + " values, got " +
                         std::to_string(v.size()),
                     line_no);
  return v;
}

}  // namespace

void write_tableau(const ButcherTableau& t, unsigned precision_bits,
                   const std::string& path) {
  std::string out = "q=" + std::to_string(t.q) +
                    " precision_bits=" + std::to_string(precision_bits) + "\n";
  append_row(out, t.c.data(), t.q);
  append_row(out, t.b.data(), t.q);
  for (std::size_t i = 0; i < t.q; ++i)
    append_row(out, t.a.data() + i * t.q, t.q);

  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ArgumentError("cannot open '" + tmp + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw ArgumentError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ArgumentError("cannot move tableau into place: " + ec.message());
  }
}

ButcherTableau read_tableau(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open tableau file '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw ParseError("empty tableau file", 1);
  std::size_t q = 0;
  unsigned bits = 0;
  if (std::sscanf(line.c_str(), "q=%zu precision_bits=%u", &q, &bits) != 2 ||
      q == 0)
    throw ParseError("expected header 'q=<q> precision_bits=<p>'", 1);
  ButcherTableau t;
  t.q = q;
  long line_no = 1;
  auto next_line = [&]() -> const std::string& {
    if (!std::getline(f, line))
      throw ParseError("unexpected end of tableau file", line_no + 1);
    ++line_no;
    return line;
  };
  t.c = parse_row(next_line(), q, line_no);
  t.b = parse_row(next_line(), q, line_no);
  t.a.reserve(q * q);
  for (std::size_t i = 0; i < q; ++i) {
    const auto row = parse_row(next_line(), q, line_no);
    t.a.insert(t.a.end(), row.begin(), row.end());
  }
  return t;
}

ButcherTableau load_or_generate(std::size_t q, unsigned precision_bits,
                                const std::string& cache_dir,
                                bool* regenerated) {
  std::filesystem::create_directories(cache_dir);
  const std::string path = cache_dir + "/gauss_q" + std::to_string(q) + "_p" +
                           std::to_string(precision_bits) + ".txt";
  if (std::filesystem::exists(path)) {
    if (regenerated) *regenerated = false;
    return read_tableau(path);
  }
  ButcherTableau t = gauss_legendre_tableau(q, precision_bits);
  write_tableau(t, precision_bits, path);
  if (regenerated) *regenerated = true;
  return t;
}

}  // namespace pinn
