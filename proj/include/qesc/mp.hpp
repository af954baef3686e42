#ifndef QESC_MP_HPP
#define QESC_MP_HPP

#include <gmp.h>
#include <mpfr.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qesc {

// Rounding direction of a single operation. There is no global rounding
// state anywhere in this library; every inexact operation names its
// direction at the call site.
enum class Round { Down, Up, Nearest, Zero };

inline mpfr_rnd_t to_mpfr(Round r) {
  switch (r) {
    case Round::Down:
      return MPFR_RNDD;
    case Round::Up:
      return MPFR_RNDU;
    case Round::Zero:
      return MPFR_RNDZ;
    default:
      return MPFR_RNDN;
  }
}

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arbitrary-precision binary float with an explicit precision (significand
// bits) fixed at construction. +inf/-inf are legal values and propagate
// through arithmetic; NaN only ever appears transiently (e.g. inf - inf)
// and is mapped out by the interval layer.
//
// Arithmetic members compute into *this; source operands may alias *this
// (mpfr supports in-place operation).
class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t prec) { mpfr_init2(v_, prec); }

  MpFloat(const MpFloat& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);  // same precision: exact
  }

  MpFloat(MpFloat&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }

  MpFloat& operator=(const MpFloat& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }

  MpFloat& operator=(MpFloat&& other) noexcept {
    if (this != &other) mpfr_swap(v_, other.v_);
    return *this;
  }

  ~MpFloat() { mpfr_clear(v_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  // -- factories ----------------------------------------------------------

  static MpFloat from_double(double d, mpfr_prec_t prec, Round r) {
    MpFloat x(prec);
    mpfr_set_d(x.v_, d, to_mpfr(r));
    return x;
  }

  static MpFloat from_int(long n, mpfr_prec_t prec) {
    MpFloat x(prec);
    mpfr_set_si(x.v_, n, MPFR_RNDN);
    return x;
  }

  // Parses decimal ("1e-3", "0.25") or hex ("0x1.9p-1") notation; also
  // accepts "inf", "-inf", "nan". Returns nullopt on malformed input.
  static std::optional<MpFloat> parse(std::string_view s, mpfr_prec_t prec,
                                      Round r);

  static MpFloat pos_inf(mpfr_prec_t prec) {
    MpFloat x(prec);
    mpfr_set_inf(x.v_, +1);
    return x;
  }

  static MpFloat neg_inf(mpfr_prec_t prec) {
    MpFloat x(prec);
    mpfr_set_inf(x.v_, -1);
    return x;
  }

  static MpFloat zero(mpfr_prec_t prec) {
    MpFloat x(prec);
    mpfr_set_zero(x.v_, +1);
    return x;
  }

  // -- queries -------------------------------------------------------------

  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_inf() const { return mpfr_inf_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  bool operator<(const MpFloat& o) const { return mpfr_less_p(v_, o.v_); }
  bool operator<=(const MpFloat& o) const { return mpfr_lessequal_p(v_, o.v_); }
  bool operator>(const MpFloat& o) const { return mpfr_greater_p(v_, o.v_); }
  bool operator>=(const MpFloat& o) const {
    return mpfr_greaterequal_p(v_, o.v_);
  }
  bool operator==(const MpFloat& o) const { return mpfr_equal_p(v_, o.v_); }
  bool operator!=(const MpFloat& o) const { return !mpfr_equal_p(v_, o.v_); }

  int cmp_d(double d) const { return mpfr_cmp_d(v_, d); }

  double to_double(Round r) const { return mpfr_get_d(v_, to_mpfr(r)); }

  // -- mutation ------------------------------------------------------------

  void set(const MpFloat& x, Round r) { mpfr_set(v_, x.v_, to_mpfr(r)); }
  void set_d(double d, Round r) { mpfr_set_d(v_, d, to_mpfr(r)); }
  void set_si(long n) { mpfr_set_si(v_, n, MPFR_RNDN); }
  void set_zero() { mpfr_set_zero(v_, +1); }
  void set_inf(int sign) { mpfr_set_inf(v_, sign); }
  void set_nan() { mpfr_set_nan(v_); }

  void add(const MpFloat& a, const MpFloat& b, Round r) {
    mpfr_add(v_, a.v_, b.v_, to_mpfr(r));
  }
  void sub(const MpFloat& a, const MpFloat& b, Round r) {
    mpfr_sub(v_, a.v_, b.v_, to_mpfr(r));
  }
  void mul(const MpFloat& a, const MpFloat& b, Round r) {
    mpfr_mul(v_, a.v_, b.v_, to_mpfr(r));
  }
  void div(const MpFloat& a, const MpFloat& b, Round r) {
    mpfr_div(v_, a.v_, b.v_, to_mpfr(r));
  }
  void sqr(const MpFloat& a, Round r) { mpfr_sqr(v_, a.v_, to_mpfr(r)); }
  void one_sub(const MpFloat& a, Round r) {
    mpfr_ui_sub(v_, 1, a.v_, to_mpfr(r));
  }
  void neg(const MpFloat& a) { mpfr_neg(v_, a.v_, MPFR_RNDN); }  // exact
  void mul_si(const MpFloat& a, long n, Round r) {
    mpfr_mul_si(v_, a.v_, n, to_mpfr(r));
  }
  void div_ui(const MpFloat& a, unsigned long n, Round r) {
    mpfr_div_ui(v_, a.v_, n, to_mpfr(r));
  }
  void mul_2si(const MpFloat& a, long e) {
    mpfr_mul_2si(v_, a.v_, e, MPFR_RNDN);  // exact (exponent shift)
  }

  // result >= sqrt(x); negative input is a caller bug
  void sqrt_up_of(const MpFloat& x) {
    if (x.sign() < 0) throw DomainError("sqrt_up: negative input");
    mpfr_sqrt(v_, x.v_, MPFR_RNDU);
  }

  // -- serialization -------------------------------------------------------

  // Lowercase hex-float ("0x1.8p+1"); bit-exact round trip via parse().
  std::string to_hex() const;

  // Fixed-point decimal with the given fractional digit count, rounded in
  // the given direction.
  std::string to_decimal_fixed(int digits, Round r) const;

  // Scientific decimal with the given significant digit count.
  std::string to_decimal_sci(int digits, Round r) const;

  // raw handle, for interop (oracle conversions, printf)
  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

 private:
  mpfr_t v_;
};

// rounded-to-nearest midpoint of [lo, hi] at their precision; exact in the
// sense that the returned value is representable
MpFloat midpoint(const MpFloat& lo, const MpFloat& hi);

}  // namespace qesc

#endif
