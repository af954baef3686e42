#ifndef QESC_ANALYTICS_HPP
#define QESC_ANALYTICS_HPP

#include "qesc/engine.hpp"
#include "qesc/survey.hpp"

namespace qesc {

struct CurvePoint {
  MpFloat threshold;
  std::int64_t count = 0;
  WidthBounds measure;
};

// points inherit the threshold order given by the caller; for "at least"
// curves over increasing thresholds the measure lower bounds are
// non-increasing
using MeasureCurve = std::vector<CurvePoint>;

// Total (directed-rounded) parameter measure of records that survived at
// least N iterates before meeting the neighbourhood: survey records with
// first_hit >= N, run records with escape_time >= N. Summed in record
// order.
MeasureCurve measure_at_least_n(const std::vector<SurveyRecord>& records,
                                const std::vector<std::int64_t>& thresholds,
                                mpfr_prec_t prec);
MeasureCurve measure_at_least_n(const std::vector<ClassifiedSegment>& records,
                                const std::vector<std::int64_t>& thresholds,
                                mpfr_prec_t prec);

// Total parameter measure of records whose certified image width at the
// hit (resp. escape) iterate is at least the threshold.
MeasureCurve measure_width_at_least(const std::vector<SurveyRecord>& records,
                                    const std::vector<MpFloat>& thresholds,
                                    mpfr_prec_t prec);
MeasureCurve measure_width_at_least(
    const std::vector<ClassifiedSegment>& records,
    const std::vector<MpFloat>& thresholds, mpfr_prec_t prec);

// Log-uniform width histogram of the ESCAPED family over [span_lo,
// span_hi]: slot k covers widths in [span_lo * r^k, span_lo * r^(k+1))
// with r = (span_hi/span_lo)^(1/slot_count); out-of-span widths clamp to
// the end slots.
struct WidthHistogram {
  struct Slot {
    std::int64_t count = 0;
    WidthBounds measure;
  };
  int slot_count;
  MpFloat span_lo, span_hi;
  std::vector<Slot> slots;

  // slot boundary k in [0, slot_count]: span_lo * r^k (double precision,
  // presentation only)
  double boundary(int k) const;
};

WidthHistogram width_slots(const std::vector<ClassifiedSegment>& classified,
                           int slot_count, const MpFloat& span_lo,
                           const MpFloat& span_hi);

struct PieSlice {
  double width_from = 0, width_to = 0;  // decade boundaries
  std::int64_t count = 0;
  WidthBounds measure;
  bool merged_tail = false;  // catch-all for the sub-2% small-width slots
};

struct SubrangeSummary {
  MpFloat range_lo, range_hi;
  std::int64_t escaped_count = 0;
  WidthBounds escaped_measure;      // clipped to the range
  WidthBounds mu_percent;           // escaped measure / |range|, in percent
  std::vector<PieSlice> pie;        // slices sum to escaped_measure
};

// Per-range ESCAPED share and width-class decomposition. Accepts one
// result per range (separate runs) and requires their configurations to
// agree on everything except omega; throws ConfigError otherwise.
std::vector<SubrangeSummary> subrange_summary(
    const std::vector<const RunResult*>& results,
    const std::vector<const ResolvedConfig*>& configs,
    const std::vector<std::pair<MpFloat, MpFloat>>& ranges);

// Same summaries computed by filtering a single full-domain run, clipping
// segments to each range.
std::vector<SubrangeSummary> subrange_summary_from_single(
    const RunResult& result,
    const std::vector<std::pair<MpFloat, MpFloat>>& ranges,
    mpfr_prec_t prec);

}  // namespace qesc

#endif
