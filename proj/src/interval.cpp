#include "qesc/interval.hpp"

namespace qesc {

void MpInterval::add(MpInterval& dst, const MpInterval& x,
                     const MpInterval& y) {
  assert(&dst != &x && &dst != &y);
  dst.lo_.add(x.lo_, y.lo_, Round::Down);
  dst.hi_.add(x.hi_, y.hi_, Round::Up);
  dst.nan_guard();
}

void MpInterval::sub(MpInterval& dst, const MpInterval& x,
                     const MpInterval& y) {
  assert(&dst != &x && &dst != &y);
  dst.lo_.sub(x.lo_, y.hi_, Round::Down);
  dst.hi_.sub(x.hi_, y.lo_, Round::Up);
  dst.nan_guard();
}

void MpInterval::sqr(MpInterval& dst, const MpInterval& x) {
  assert(&dst != &x);
  const int slo = x.lo_.sign();
  const int shi = x.hi_.sign();
  if (slo >= 0) {  // x >= 0
    dst.lo_.sqr(x.lo_, Round::Down);
    dst.hi_.sqr(x.hi_, Round::Up);
  } else if (shi <= 0) {  // x <= 0
    dst.lo_.sqr(x.hi_, Round::Down);
    dst.hi_.sqr(x.lo_, Round::Up);
  } else {  // 0 interior: lo = 0, hi from the endpoint of larger magnitude
    dst.lo_.set_zero();
    if (mpfr_cmpabs(x.lo_.raw(), x.hi_.raw()) >= 0)
      dst.hi_.sqr(x.lo_, Round::Up);
    else
      dst.hi_.sqr(x.hi_, Round::Up);
  }
  dst.nan_guard();
}

void MpInterval::mul(MpInterval& dst, const MpInterval& x,
                     const MpInterval& y) {
  assert(&dst != &x && &dst != &y);
  const MpFloat &a = x.lo_, &b = x.hi_, &c = y.lo_, &d = y.hi_;
  const int sa = a.sign(), sb = b.sign(), sc = c.sign(), sd = d.sign();

  if (sa >= 0) {          // x >= 0
    if (sc >= 0) {        // y >= 0
      dst.lo_.mul(a, c, Round::Down);
      dst.hi_.mul(b, d, Round::Up);
    } else if (sd <= 0) {  // y <= 0
      dst.lo_.mul(b, c, Round::Down);
      dst.hi_.mul(a, d, Round::Up);
    } else {               // y straddles 0
      dst.lo_.mul(b, c, Round::Down);
      dst.hi_.mul(b, d, Round::Up);
    }
  } else if (sb <= 0) {   // x <= 0
    if (sc >= 0) {
      dst.lo_.mul(a, d, Round::Down);
      dst.hi_.mul(b, c, Round::Up);
    } else if (sd <= 0) {
      dst.lo_.mul(b, d, Round::Down);
      dst.hi_.mul(a, c, Round::Up);
    } else {
      dst.lo_.mul(a, d, Round::Down);
      dst.hi_.mul(a, c, Round::Up);
    }
  } else {                // x straddles 0
    if (sc >= 0) {
      dst.lo_.mul(a, d, Round::Down);
      dst.hi_.mul(b, d, Round::Up);
    } else if (sd <= 0) {
      dst.lo_.mul(b, c, Round::Down);
      dst.hi_.mul(a, c, Round::Up);
    } else {  // both straddle: min(ad, bc), max(ac, bd)
      MpFloat t(dst.precision());
      dst.lo_.mul(a, d, Round::Down);
      t.mul(b, c, Round::Down);
      if (t < dst.lo_) dst.lo_ = t;
      dst.hi_.mul(a, c, Round::Up);
      t.mul(b, d, Round::Up);
      if (t > dst.hi_) dst.hi_ = t;
    }
  }
  dst.nan_guard();
}

void MpInterval::hull_of(MpInterval& dst, const MpInterval& x,
                         const MpInterval& y) {
  dst.lo_ = (x.lo_ <= y.lo_) ? x.lo_ : y.lo_;
  dst.hi_ = (x.hi_ >= y.hi_) ? x.hi_ : y.hi_;
}

void MpInterval::one_minus(MpInterval& dst, const MpInterval& x) {
  assert(&dst != &x);
  dst.lo_.one_sub(x.hi_, Round::Down);
  dst.hi_.one_sub(x.lo_, Round::Up);
  dst.nan_guard();
}

MpInterval ival_add(const MpInterval& x, const MpInterval& y) {
  MpInterval r(x.precision());
  MpInterval::add(r, x, y);
  return r;
}

MpInterval ival_sub(const MpInterval& x, const MpInterval& y) {
  MpInterval r(x.precision());
  MpInterval::sub(r, x, y);
  return r;
}

MpInterval ival_mul(const MpInterval& x, const MpInterval& y) {
  MpInterval r(x.precision());
  MpInterval::mul(r, x, y);
  return r;
}

MpInterval ival_sqr(const MpInterval& x) {
  MpInterval r(x.precision());
  MpInterval::sqr(r, x);
  return r;
}

MpInterval hull(const MpInterval& x, const MpInterval& y) {
  MpInterval r(x.precision());
  MpInterval::hull_of(r, x, y);
  return r;
}

WidthBounds width_bounds(const MpInterval& x) {
  if (!x.is_finite()) throw DomainError("width_bounds: non-finite endpoints");
  WidthBounds w{MpFloat(x.precision()), MpFloat(x.precision())};
  w.lower.sub(x.hi(), x.lo(), Round::Down);
  w.upper.sub(x.hi(), x.lo(), Round::Up);
  assert(w.lower.sign() >= 0);
  return w;
}

WidthBounds sum_measure(const std::vector<WidthBounds>& widths,
                        mpfr_prec_t prec) {
  WidthBounds total{MpFloat::zero(prec), MpFloat::zero(prec)};
  for (const auto& w : widths) {
    total.lower.add(total.lower, w.lower, Round::Down);
    total.upper.add(total.upper, w.upper, Round::Up);
  }
  return total;
}

MpFloat sqrt_up(const MpFloat& x) {
  MpFloat r(x.precision());
  r.sqrt_up_of(x);
  return r;
}

}  // namespace qesc
