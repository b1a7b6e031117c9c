#pragma once

#include <mpfr.h>

#include <string>

namespace pinn {

/// Arbitrary-precision real with value semantics (round-to-nearest).
/// Binary operations carry the larger operand precision into the result.
class BigFloat {
 public:
  explicit BigFloat(unsigned precision_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(precision_bits));
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double value, unsigned precision_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(precision_bits));
    mpfr_set_d(v_, value, MPFR_RNDN);
  }
  BigFloat(long value, unsigned precision_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(precision_bits));
    mpfr_set_si(v_, value, MPFR_RNDN);
  }
  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  unsigned precision() const {
    return static_cast<unsigned>(mpfr_get_prec(v_));
  }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Decimal rendering with the given significant digits (shortest-form
  /// digits are not needed; callers choose 17 for 64-bit round trips).
  std::string to_string(int digits) const;

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r(result_prec(a, b));
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r(result_prec(a, b));
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r(result_prec(a, b));
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
    BigFloat r(result_prec(a, b));
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator-(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat abs(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_abs(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator<(const BigFloat& a, const BigFloat& b) {
    return mpfr_cmp(a.v_, b.v_) < 0;
  }
  friend bool operator>(const BigFloat& a, const BigFloat& b) {
    return mpfr_cmp(a.v_, b.v_) > 0;
  }
  friend bool operator==(const BigFloat& a, const BigFloat& b) {
    return mpfr_cmp(a.v_, b.v_) == 0;
  }
  friend bool operator<(const BigFloat& a, double b) {
    return mpfr_cmp_d(a.v_, b) < 0;
  }
  friend bool operator>(const BigFloat& a, double b) {
    return mpfr_cmp_d(a.v_, b) > 0;
  }

 private:
  static unsigned result_prec(const BigFloat& a, const BigFloat& b) {
    return a.precision() > b.precision() ? a.precision() : b.precision();
  }
  mpfr_t v_;
};

}  // namespace pinn
