#include "qesc/analytics.hpp"

#include <cmath>

namespace qesc {

namespace {

WidthBounds zero_measure(mpfr_prec_t prec) {
  return WidthBounds{MpFloat::zero(prec), MpFloat::zero(prec)};
}

void accumulate(WidthBounds& acc, const WidthBounds& wb) {
  acc.lower.add(acc.lower, wb.lower, Round::Down);
  acc.upper.add(acc.upper, wb.upper, Round::Up);
}

template <typename Record, typename Pred>
MeasureCurve curve_over(const std::vector<Record>& records,
                        const std::vector<MpFloat>& thresholds,
                        mpfr_prec_t prec, Pred include) {
  MeasureCurve curve;
  curve.reserve(thresholds.size());
  for (const MpFloat& t : thresholds) {
    CurvePoint pt{t, 0, zero_measure(prec)};
    for (const Record& r : records) {
      if (!include(r, t)) continue;
      ++pt.count;
      accumulate(pt.measure, r.segment.width());
    }
    curve.push_back(std::move(pt));
  }
  return curve;
}

std::vector<MpFloat> as_mpfloat(const std::vector<std::int64_t>& ns,
                                mpfr_prec_t prec) {
  std::vector<MpFloat> out;
  out.reserve(ns.size());
  for (std::int64_t n : ns)
    out.push_back(MpFloat::from_int(static_cast<long>(n), prec));
  return out;
}

}  // namespace

MeasureCurve measure_at_least_n(const std::vector<SurveyRecord>& records,
                                const std::vector<std::int64_t>& thresholds,
                                mpfr_prec_t prec) {
  auto ts = as_mpfloat(thresholds, prec);
  return curve_over(records, ts, prec,
                    [](const SurveyRecord& r, const MpFloat& t) {
                      return r.outcome == SurveyOutcome::Hit &&
                             t.cmp_d(static_cast<double>(r.first_hit)) <= 0;
                    });
}

MeasureCurve measure_at_least_n(const std::vector<ClassifiedSegment>& records,
                                const std::vector<std::int64_t>& thresholds,
                                mpfr_prec_t prec) {
  auto ts = as_mpfloat(thresholds, prec);
  return curve_over(records, ts, prec,
                    [](const ClassifiedSegment& r, const MpFloat& t) {
                      return r.verdict == Verdict::Escaped &&
                             t.cmp_d(static_cast<double>(r.escape_time)) <= 0;
                    });
}

MeasureCurve measure_width_at_least(const std::vector<SurveyRecord>& records,
                                    const std::vector<MpFloat>& thresholds,
                                    mpfr_prec_t prec) {
  return curve_over(records, thresholds, prec,
                    [](const SurveyRecord& r, const MpFloat& t) {
                      return r.outcome == SurveyOutcome::Hit &&
                             r.width_at_hit && r.width_at_hit->lower >= t;
                    });
}

MeasureCurve measure_width_at_least(
    const std::vector<ClassifiedSegment>& records,
    const std::vector<MpFloat>& thresholds, mpfr_prec_t prec) {
  return curve_over(records, thresholds, prec,
                    [](const ClassifiedSegment& r, const MpFloat& t) {
                      return r.verdict == Verdict::Escaped &&
                             r.width_at_escape &&
                             r.width_at_escape->lower >= t;
                    });
}

double WidthHistogram::boundary(int k) const {
  const double lo = span_lo.to_double(Round::Nearest);
  const double hi = span_hi.to_double(Round::Nearest);
  return lo * std::pow(hi / lo, static_cast<double>(k) / slot_count);
}

WidthHistogram width_slots(const std::vector<ClassifiedSegment>& classified,
                           int slot_count, const MpFloat& span_lo,
                           const MpFloat& span_hi) {
  if (slot_count < 1) throw ConfigError("histogram_slots: must be >= 1");
  if (!(span_lo.sign() > 0) || !(span_lo < span_hi))
    throw ConfigError("histogram span: requires 0 < lo < hi");
  const mpfr_prec_t prec = span_lo.precision();

  WidthHistogram h{slot_count, span_lo, span_hi, {}};
  h.slots.reserve(static_cast<std::size_t>(slot_count));
  for (int k = 0; k < slot_count; ++k)
    h.slots.push_back(WidthHistogram::Slot{0, zero_measure(prec)});

  const double lo_d = span_lo.to_double(Round::Nearest);
  const double hi_d = span_hi.to_double(Round::Nearest);
  const double log_span = std::log(hi_d / lo_d);

  for (const auto& c : classified) {
    if (c.verdict != Verdict::Escaped) continue;
    WidthBounds wb = c.segment.width();
    const double w = wb.lower.to_double(Round::Nearest);
    int k = 0;
    if (w > 0)
      k = static_cast<int>(
          std::floor(slot_count * std::log(w / lo_d) / log_span));
    k = std::max(0, std::min(slot_count - 1, k));
    auto& slot = h.slots[static_cast<std::size_t>(k)];
    ++slot.count;
    accumulate(slot.measure, wb);
  }
  return h;
}

namespace {

void require_same(bool ok, const char* field) {
  if (!ok)
    throw ConfigError(std::string("subrange_summary: configs differ at ") +
                      field);
}

// decade boundaries, widest class first
constexpr int kPieClasses = 9;

int pie_class(double width) {
  // class j holds widths in [10^-(j+2), 10^-(j+1)), j = 0 widest
  if (width >= 1e-2) return 0;
  for (int j = 1; j < kPieClasses - 1; ++j)
    if (width >= std::pow(10.0, -(j + 2))) return j;
  return kPieClasses - 1;
}

SubrangeSummary summarize_range(const std::vector<ClassifiedSegment>& rows,
                                const MpFloat& range_lo,
                                const MpFloat& range_hi, mpfr_prec_t prec) {
  SubrangeSummary s{range_lo, range_hi, 0, zero_measure(prec),
                    zero_measure(prec), {}};

  std::vector<WidthBounds> class_measure;
  std::vector<std::int64_t> class_count(kPieClasses, 0);
  for (int j = 0; j < kPieClasses; ++j)
    class_measure.push_back(zero_measure(prec));

  MpFloat clip_lo(prec), clip_hi(prec);
  for (const auto& c : rows) {
    if (c.verdict != Verdict::Escaped) continue;
    clip_lo = c.segment.lo >= range_lo ? c.segment.lo : range_lo;
    clip_hi = c.segment.hi <= range_hi ? c.segment.hi : range_hi;
    if (!(clip_lo < clip_hi)) continue;
    WidthBounds clipped{MpFloat(prec), MpFloat(prec)};
    clipped.lower.sub(clip_hi, clip_lo, Round::Down);
    clipped.upper.sub(clip_hi, clip_lo, Round::Up);
    ++s.escaped_count;
    accumulate(s.escaped_measure, clipped);
    // the width class reflects the segment's own size
    const int j =
        pie_class(c.segment.width().lower.to_double(Round::Nearest));
    ++class_count[static_cast<std::size_t>(j)];
    accumulate(class_measure[static_cast<std::size_t>(j)], clipped);
  }

  // mu = 100 * measure / |range|, outward
  MpFloat rw_up(prec), rw_dn(prec), t(prec);
  rw_up.sub(range_hi, range_lo, Round::Up);
  rw_dn.sub(range_hi, range_lo, Round::Down);
  t.mul_si(s.escaped_measure.lower, 100, Round::Down);
  s.mu_percent.lower.div(t, rw_up, Round::Down);
  t.mul_si(s.escaped_measure.upper, 100, Round::Up);
  s.mu_percent.upper.div(t, rw_dn, Round::Up);
  if (s.mu_percent.lower.sign() < 0) s.mu_percent.lower.set_zero();
  if (s.mu_percent.upper.cmp_d(100.0) > 0) s.mu_percent.upper.set_d(100.0, Round::Nearest);

  // pie: keep classes through the last one holding >= 2% of the mass,
  // merge the remaining small-width tail into a single slice
  const double total = s.escaped_measure.lower.to_double(Round::Nearest);
  int last_major = -1;
  for (int j = 0; j < kPieClasses; ++j) {
    const double share =
        total > 0
            ? class_measure[static_cast<std::size_t>(j)].lower.to_double(
                  Round::Nearest) /
                  total
            : 0.0;
    if (share >= 0.02) last_major = j;
  }
  for (int j = 0; j <= last_major; ++j) {
    if (class_count[static_cast<std::size_t>(j)] == 0) continue;
    s.pie.push_back(PieSlice{std::pow(10.0, -(j + 2)),
                             std::pow(10.0, -(j + 1)),
                             class_count[static_cast<std::size_t>(j)],
                             class_measure[static_cast<std::size_t>(j)],
                             false});
  }
  WidthBounds tail = zero_measure(prec);
  std::int64_t tail_count = 0;
  for (int j = last_major + 1; j < kPieClasses; ++j) {
    tail_count += class_count[static_cast<std::size_t>(j)];
    accumulate(tail, class_measure[static_cast<std::size_t>(j)]);
  }
  if (tail_count > 0)
    s.pie.push_back(PieSlice{0.0, std::pow(10.0, -(last_major + 2)),
                             tail_count, tail, true});
  return s;
}

}  // namespace

std::vector<SubrangeSummary> subrange_summary(
    const std::vector<const RunResult*>& results,
    const std::vector<const ResolvedConfig*>& configs,
    const std::vector<std::pair<MpFloat, MpFloat>>& ranges) {
  if (results.size() != configs.size() || results.size() != ranges.size())
    throw ConfigError("subrange_summary: results/configs/ranges size mismatch");
  if (results.empty()) return {};

  const ResolvedConfig& ref = *configs.front();
  for (const ResolvedConfig* c : configs) {
    require_same(c->precision == ref.precision, "precision");
    require_same(c->nbhd.delta() == ref.nbhd.delta(), "delta");
    require_same(c->w_fraction == ref.w_fraction, "w");
    require_same(c->n0 == ref.n0, "n0");
    require_same(c->n_max == ref.n_max, "n_max");
    require_same(c->n_min == ref.n_min, "n_min");
    require_same(c->u == ref.u, "u");
    require_same(c->s == ref.s, "s");
  }

  std::vector<SubrangeSummary> out;
  out.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i)
    out.push_back(summarize_range(results[i]->classified, ranges[i].first,
                                  ranges[i].second, ref.precision));
  return out;
}

std::vector<SubrangeSummary> subrange_summary_from_single(
    const RunResult& result,
    const std::vector<std::pair<MpFloat, MpFloat>>& ranges,
    mpfr_prec_t prec) {
  std::vector<SubrangeSummary> out;
  out.reserve(ranges.size());
  for (const auto& r : ranges)
    out.push_back(summarize_range(result.classified, r.first, r.second, prec));
  return out;
}

}  // namespace qesc
