#ifndef QESC_ORBIT_HPP
#define QESC_ORBIT_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qesc/interval.hpp"

namespace qesc {

// Parameter subinterval [lo, hi] with exact (representable) endpoints,
// plus the number of iterates already certified disjoint from the critical
// neighbourhood when the segment was queued.
struct ParamSegment {
  MpFloat lo, hi;
  std::int64_t certified_iter = 0;

  ParamSegment(MpFloat lo_, MpFloat hi_, std::int64_t certified = 0)
      : lo(std::move(lo_)), hi(std::move(hi_)), certified_iter(certified) {
    if (!(lo < hi) || !lo.is_finite() || !hi.is_finite())
      throw DomainError("ParamSegment: requires finite lo < hi");
  }

  WidthBounds width() const {
    return width_bounds(MpInterval::make(lo, hi));
  }
};

// The neighbourhood (-delta, delta) of the critical point, with cached
// derived values. delta is stored as an exact representable value; the
// resolver that parses "1e-3" records the conversion direction.
class CriticalNbhd {
 public:
  explicit CriticalNbhd(MpFloat delta)
      : delta_(std::move(delta)),
        neg_delta_(delta_.precision()),
        sqrt_delta_up_(delta_.precision()) {
    if (delta_.sign() <= 0 || !delta_.is_finite())
      throw DomainError("CriticalNbhd: delta must be positive and finite");
    neg_delta_.neg(delta_);
    sqrt_delta_up_.sqrt_up_of(delta_);
  }

  const MpFloat& delta() const { return delta_; }
  const MpFloat& neg_delta() const { return neg_delta_; }
  const MpFloat& sqrt_delta_up() const { return sqrt_delta_up_; }

  // true iff x is provably disjoint from (-delta, delta); boundary touch
  // counts as disjoint because the neighbourhood is open
  bool provably_disjoint(const MpInterval& x) const {
    return x.lo() >= delta_ || x.hi() <= neg_delta_;
  }

 private:
  MpFloat delta_;
  MpFloat neg_delta_;
  MpFloat sqrt_delta_up_;
};

enum class StepStatus { Ok, MonotonicityFailure, PrecisionLoss };
enum class DeltaHit { Disjoint, Hit };

// Certified state of the critical orbit over one parameter segment.
//
// Tracks, at iterate n: enclosures of the orbit of each (exact) segment
// endpoint, an enclosure of the parameter derivative of the iterate over
// the whole segment, and the monotone image hull. The derivative enclosure
// is required to exclude zero at every step; a step that cannot re-certify
// this reports MonotonicityFailure and leaves the state at the last valid
// iterate. Enclosure-width blowup (relative to the loss threshold) and
// non-finite bounds report PrecisionLoss the same way.
//
// Copyable; step() mutates in place. Identical inputs at identical
// precision give bit-identical state sequences.
class Orbit {
 public:
  // loss_threshold: a thin-endpoint enclosure wider than this aborts the
  // iteration (the engine resolver uses delta/10)
  Orbit(const ParamSegment& segment, MpFloat loss_threshold);

  // degenerate (single-parameter) orbit; monotone width is identically
  // zero so the overlap cutoff is disabled
  Orbit(const MpFloat& point, MpFloat loss_threshold);

  std::int64_t n() const { return n_; }
  int orientation() const { return orientation_; }
  const MpInterval& endpoint_lo_enclosure() const { return e_lo_; }
  const MpInterval& endpoint_hi_enclosure() const { return e_hi_; }
  const MpInterval& derivative_enclosure() const { return d_enc_; }
  const MpInterval& hull() const { return hull_; }

  // advances to iterate n+1, or reports why it cannot; on failure the
  // state is unchanged and failed_iter() names the iterate that failed
  StepStatus step();

  std::int64_t failed_iter() const { return n_ + 1; }

  DeltaHit delta_hit(const CriticalNbhd& nbhd) const {
    return nbhd.provably_disjoint(hull_) ? DeltaHit::Disjoint : DeltaHit::Hit;
  }

  // Provable bounds on |omega_n| = |c_n(hi) - c_n(lo)|. The lower bound
  // uses the inner endpoint-enclosure gap per orientation and can be
  // negative when the enclosures overlap (precision loss territory).
  WidthBounds monotone_width() const;

  // Escape test at the current iterate N (caller guarantees iterates
  // 0..N-1 were certified disjoint and N is the first hit):
  // N >= n0 and monotone width lower bound >= sqrt_up(delta).
  bool escape_check(const CriticalNbhd& nbhd, std::int64_t n0) const;

 private:
  mpfr_prec_t prec_;
  std::int64_t n_ = 0;
  int orientation_ = +1;
  bool thin_segment_ = false;
  MpInterval a_lo_, a_hi_;  // thin parameter endpoints (constant)
  MpInterval e_lo_, e_hi_;  // enclosures of c_n(lo), c_n(hi)
  MpInterval e_lo_new_, e_hi_new_;
  MpInterval d_enc_;        // enclosure of c_n' over the segment
  MpInterval hull_;         // enclosure of omega_n
  MpInterval t1_, t2_;      // step workspace
  MpFloat loss_threshold_;
  MpFloat w_tmp_;
};

// Enclosure of c_n(a) for a single exact parameter value, iterated from
// c_0(a) = a. Reuses the caller's workspace across calls.
class PointOrbitEval {
 public:
  explicit PointOrbitEval(mpfr_prec_t prec)
      : a_(prec), e_(prec), t_(prec) {}

  // enclosure of c_n(point); the result reference stays valid until the
  // next call
  const MpInterval& eval(const MpFloat& point, std::int64_t n);

 private:
  MpInterval a_, e_, t_;
};

// Trajectory dump (one row per iterate, hex-float columns):
// n,eLo_lo,eLo_hi,eHi_lo,eHi_hi,d_lo,d_hi,hull_lo,hull_hi
// Stops early on a step failure; returns the final status.
StepStatus dump_orbit_csv(const ParamSegment& segment,
                          const MpFloat& loss_threshold, std::int64_t max_iter,
                          std::ostream& out);

}  // namespace qesc

#endif
