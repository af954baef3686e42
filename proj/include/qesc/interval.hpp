#ifndef QESC_INTERVAL_HPP
#define QESC_INTERVAL_HPP

#include <cassert>
#include <utility>
#include <vector>

#include "qesc/mp.hpp"

namespace qesc {

// Closed interval [lo, hi] with directed-rounded endpoints. All arithmetic
// rounds lo toward -inf and hi toward +inf, so a result always encloses the
// exact real image of its operands. Infinite endpoints are allowed and
// propagate; any NaN produced by arithmetic (inf - inf) widens the result
// to [-inf, +inf], which keeps the kernel total and sound.
class MpInterval {
 public:
  // uninitialized workspace value ([nan, nan]); assign before use
  explicit MpInterval(mpfr_prec_t prec) : lo_(prec), hi_(prec) {}

  static MpInterval thin(const MpFloat& x) {
    MpInterval r(x.precision());
    r.lo_ = x;
    r.hi_ = x;
    return r;
  }

  // validated construction; lo <= hi required
  static MpInterval make(MpFloat lo, MpFloat hi) {
    if (lo.is_nan() || hi.is_nan() || !(lo <= hi))
      throw DomainError("MpInterval: endpoints must satisfy lo <= hi");
    MpInterval r(lo.precision());
    r.lo_ = std::move(lo);
    r.hi_ = std::move(hi);
    return r;
  }

  static MpInterval entire(mpfr_prec_t prec) {
    MpInterval r(prec);
    r.lo_.set_inf(-1);
    r.hi_.set_inf(+1);
    return r;
  }

  const MpFloat& lo() const { return lo_; }
  const MpFloat& hi() const { return hi_; }
  mpfr_prec_t precision() const { return lo_.precision(); }

  bool is_finite() const { return lo_.is_finite() && hi_.is_finite(); }
  bool is_thin() const { return lo_ == hi_; }
  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
  bool contains(const MpFloat& x) const { return lo_ <= x && x <= hi_; }
  bool contains(const MpInterval& x) const {
    return lo_ <= x.lo_ && x.hi_ <= hi_;
  }

  void assign(const MpInterval& x) {
    lo_ = x.lo_;
    hi_ = x.hi_;
  }
  void assign_thin(const MpFloat& x) {
    lo_ = x;
    hi_ = x;
  }

  // In-place kernels. dst must not alias an operand (endpoint writes would
  // clobber values still needed); asserted in debug builds.
  static void add(MpInterval& dst, const MpInterval& x, const MpInterval& y);
  static void sub(MpInterval& dst, const MpInterval& x, const MpInterval& y);
  static void mul(MpInterval& dst, const MpInterval& x, const MpInterval& y);
  static void sqr(MpInterval& dst, const MpInterval& x);
  static void hull_of(MpInterval& dst, const MpInterval& x,
                      const MpInterval& y);

  // dst = [1,1] - x (used by the derivative recursion)
  static void one_minus(MpInterval& dst, const MpInterval& x);

  // exact endpoint doubling
  void scale2() {
    lo_.mul_2si(lo_, 1);
    hi_.mul_2si(hi_, 1);
  }

 private:
  void nan_guard() {
    if (lo_.is_nan() || hi_.is_nan()) {
      lo_.set_inf(-1);
      hi_.set_inf(+1);
    }
  }

  MpFloat lo_, hi_;
};

// Pure variants (allocate the result); the spec-level operation surface.
MpInterval ival_add(const MpInterval& x, const MpInterval& y);
MpInterval ival_sub(const MpInterval& x, const MpInterval& y);
MpInterval ival_mul(const MpInterval& x, const MpInterval& y);
MpInterval ival_sqr(const MpInterval& x);
MpInterval hull(const MpInterval& x, const MpInterval& y);

struct WidthBounds {
  MpFloat lower, upper;  // true width in [lower, upper]
};

// Rigorous two-sided width of a finite interval: lower = down(hi - lo),
// upper = up(hi - lo). lower is never negative.
WidthBounds width_bounds(const MpInterval& x);

// Directed-rounded totals of a list of width pairs, folded in list order.
WidthBounds sum_measure(const std::vector<WidthBounds>& widths,
                        mpfr_prec_t prec);

// result >= sqrt(x)
MpFloat sqrt_up(const MpFloat& x);

}  // namespace qesc

#endif
