#ifndef QESC_IO_HPP
#define QESC_IO_HPP

#include <iosfwd>
#include <map>

#include "qesc/analytics.hpp"

namespace qesc {

// Decimal emission convention: *_dec_lower values are rounded down,
// *_dec_upper rounded up, so printed bounds stay bounds. Endpoints are
// hex-floats and round-trip bit-exactly.

// results CSV:
// verdict,lo_hex,hi_hex,width_dec_lower,certifiedIter,escapeTime,
// widthAtEscape_dec_lower,hitIter
void write_results_csv(std::ostream& out, const RunResult& res);
std::vector<ClassifiedSegment> read_results_csv(std::istream& in,
                                                mpfr_prec_t prec);

// survey CSV:
// lo_hex,hi_hex,outcome,firstHit,widthAtHit_dec_lower,widthAtHit_dec_upper
// (the firstHit column carries the failing iterate on PROBLEM rows)
void write_survey_csv(std::ostream& out,
                      const std::vector<SurveyRecord>& records);
std::vector<SurveyRecord> read_survey_csv(std::istream& in, mpfr_prec_t prec);

// study CSV: s,excluded_dec_lower,excluded_dec_upper,wallclock_seconds
void write_study_csv(std::ostream& out,
                     const std::vector<BisectStudyRow>& rows);

// curve CSV: threshold,measure_dec_lower,measure_dec_upper,count
void write_curve_csv(std::ostream& out, const MeasureCurve& curve);

// histogram CSV:
// bucket,width_from,width_to,measure_dec_lower,measure_dec_upper,count
void write_histogram_csv(std::ostream& out, const WidthHistogram& h);

void write_subranges_json(std::ostream& out,
                          const std::vector<SubrangeSummary>& summaries);

// summary JSON: effective config echo (decimal inputs plus exact hex),
// per-verdict counts and directed measures, counters, stop state,
// wallclock
void write_summary_json(std::ostream& out, const RunConfig& cfg,
                        const ResolvedConfig& rc, const RunResult& res);

// JSON record arrays (--format json)
void write_results_json(std::ostream& out, const RunResult& res);
void write_survey_json(std::ostream& out,
                       const std::vector<SurveyRecord>& records);
void write_study_json(std::ostream& out,
                      const std::vector<BisectStudyRow>& rows);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flat "key = value" file, '#' comments, later keys win
std::map<std::string, std::string> parse_flat_config(std::istream& in);

}  // namespace qesc

#endif
