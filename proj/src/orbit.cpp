#include "qesc/orbit.hpp"

#include <ostream>

namespace qesc {

Orbit::Orbit(const ParamSegment& segment, MpFloat loss_threshold)
    : prec_(segment.lo.precision()),
      a_lo_(MpInterval::thin(segment.lo)),
      a_hi_(MpInterval::thin(segment.hi)),
      e_lo_(MpInterval::thin(segment.lo)),
      e_hi_(MpInterval::thin(segment.hi)),
      e_lo_new_(prec_),
      e_hi_new_(prec_),
      d_enc_(prec_),
      hull_(MpInterval::make(segment.lo, segment.hi)),
      t1_(prec_),
      t2_(prec_),
      loss_threshold_(std::move(loss_threshold)),
      w_tmp_(prec_) {
  // c_0(a) = a: endpoint orbits are thin, derivative is exactly 1
  d_enc_.assign_thin(MpFloat::from_int(1, prec_));
}

Orbit::Orbit(const MpFloat& point, MpFloat loss_threshold)
    : prec_(point.precision()),
      thin_segment_(true),
      a_lo_(MpInterval::thin(point)),
      a_hi_(MpInterval::thin(point)),
      e_lo_(MpInterval::thin(point)),
      e_hi_(MpInterval::thin(point)),
      e_lo_new_(prec_),
      e_hi_new_(prec_),
      d_enc_(prec_),
      hull_(MpInterval::thin(point)),
      t1_(prec_),
      t2_(prec_),
      loss_threshold_(std::move(loss_threshold)),
      w_tmp_(prec_) {
  d_enc_.assign_thin(MpFloat::from_int(1, prec_));
}

StepStatus Orbit::step() {
  // derivative first: d' = 1 - 2 * hull * d, with the hull at iterate n
  MpInterval::mul(t1_, hull_, d_enc_);
  t1_.scale2();
  MpInterval::one_minus(t2_, t1_);
  if (!t2_.is_finite()) return StepStatus::PrecisionLoss;
  if (t2_.contains_zero()) return StepStatus::MonotonicityFailure;

  // endpoint orbits into scratch: e' = a - e^2 with thin a
  MpInterval::sqr(t1_, e_lo_);
  MpInterval::sub(e_lo_new_, a_lo_, t1_);
  MpInterval::sqr(t1_, e_hi_);
  MpInterval::sub(e_hi_new_, a_hi_, t1_);
  if (!e_lo_new_.is_finite() || !e_hi_new_.is_finite())
    return StepStatus::PrecisionLoss;

  // enclosure width cutoffs
  w_tmp_.sub(e_lo_new_.hi(), e_lo_new_.lo(), Round::Up);
  if (w_tmp_ > loss_threshold_) return StepStatus::PrecisionLoss;
  w_tmp_.sub(e_hi_new_.hi(), e_hi_new_.lo(), Round::Up);
  if (w_tmp_ > loss_threshold_) return StepStatus::PrecisionLoss;

  // overlapping endpoint enclosures make the monotone width lower bound
  // non-positive; every downstream test degenerates, so abandon here
  // (not applicable to a single-point orbit, whose width is exactly zero)
  if (!thin_segment_) {
    if (t2_.lo().sign() > 0)
      w_tmp_.sub(e_hi_new_.lo(), e_lo_new_.hi(), Round::Down);
    else
      w_tmp_.sub(e_lo_new_.lo(), e_hi_new_.hi(), Round::Down);
    if (w_tmp_.sign() <= 0) return StepStatus::PrecisionLoss;
  }

  // all checks passed: commit iterate n+1
  std::swap(e_lo_, e_lo_new_);
  std::swap(e_hi_, e_hi_new_);
  d_enc_.assign(t2_);
  orientation_ = d_enc_.lo().sign() > 0 ? +1 : -1;
  MpInterval::hull_of(hull_, e_lo_, e_hi_);
  ++n_;
  return StepStatus::Ok;
}

WidthBounds Orbit::monotone_width() const {
  WidthBounds w{MpFloat(prec_), MpFloat(prec_)};
  if (orientation_ > 0)
    w.lower.sub(e_hi_.lo(), e_lo_.hi(), Round::Down);
  else
    w.lower.sub(e_lo_.lo(), e_hi_.hi(), Round::Down);
  w.upper.sub(hull_.hi(), hull_.lo(), Round::Up);
  return w;
}

bool Orbit::escape_check(const CriticalNbhd& nbhd, std::int64_t n0) const {
  if (n_ < n0) return false;
  WidthBounds w = monotone_width();
  if (w.lower.sign() <= 0) return false;
  return w.lower >= nbhd.sqrt_delta_up();
}

const MpInterval& PointOrbitEval::eval(const MpFloat& point, std::int64_t n) {
  a_.assign_thin(point);
  e_.assign_thin(point);
  for (std::int64_t i = 0; i < n; ++i) {
    MpInterval::sqr(t_, e_);
    MpInterval::sub(e_, a_, t_);
  }
  return e_;
}

namespace {
void dump_row(std::ostream& out, std::int64_t n, const Orbit& o) {
  out << n << ',' << o.endpoint_lo_enclosure().lo().to_hex() << ','
      << o.endpoint_lo_enclosure().hi().to_hex() << ','
      << o.endpoint_hi_enclosure().lo().to_hex() << ','
      << o.endpoint_hi_enclosure().hi().to_hex() << ','
      << o.derivative_enclosure().lo().to_hex() << ','
      << o.derivative_enclosure().hi().to_hex() << ','
      << o.hull().lo().to_hex() << ',' << o.hull().hi().to_hex() << '\n';
}
}  // namespace

StepStatus dump_orbit_csv(const ParamSegment& segment,
                          const MpFloat& loss_threshold, std::int64_t max_iter,
                          std::ostream& out) {
  out << "n,eLo_lo,eLo_hi,eHi_lo,eHi_hi,d_lo,d_hi,hull_lo,hull_hi\n";
  Orbit orbit(segment, loss_threshold);
  dump_row(out, 0, orbit);
  for (std::int64_t i = 1; i <= max_iter; ++i) {
    StepStatus st = orbit.step();
    if (st != StepStatus::Ok) return st;
    dump_row(out, i, orbit);
  }
  return StepStatus::Ok;
}

}  // namespace qesc
