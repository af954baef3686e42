#ifndef QESC_SURVEY_HPP
#define QESC_SURVEY_HPP

#include "qesc/engine.hpp"

namespace qesc {

enum class SurveyOutcome { Hit, Problem, Exhausted };
enum class ProblemKind { None, NoSign, PrecisionLoss };

const char* survey_outcome_name(SurveyOutcome o, ProblemKind k);

// One seeded segment iterated (no chopping, no requeue) until the first
// hull-meets-neighbourhood iterate, the first numerical problem, or n_max.
struct SurveyRecord {
  ParamSegment segment;
  SurveyOutcome outcome;
  ProblemKind problem = ProblemKind::None;
  std::int64_t first_hit = -1;   // HIT only (0 when omega itself meets it)
  std::int64_t fail_iter = -1;   // PROBLEM only
  std::optional<WidthBounds> width_at_hit;  // HIT only, monotone bounds
};

// One record per seeded segment, in seed order. Embarrassingly parallel;
// output independent of thread count.
std::vector<SurveyRecord> run_survey(const ResolvedConfig& cfg,
                                     const ProgressFn& progress = nullptr);
std::vector<SurveyRecord> run_survey(const RunConfig& cfg,
                                     const ProgressFn& progress = nullptr);

struct BisectStudyRow {
  int s;
  WidthBounds excluded;  // DELTA_EXCLUDED measure of the capped run
  std::int64_t escaped_count = 0;
  double wallclock_seconds = 0;
};

// Runs the full escape loop once per bisection-step count and records the
// measure chopped out around the critical neighbourhood.
std::vector<BisectStudyRow> run_bisect_study(
    const ResolvedConfig& base, const std::vector<int>& s_range,
    const ProgressFn& progress = nullptr);

}  // namespace qesc

#endif
