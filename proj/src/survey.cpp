#include "qesc/survey.hpp"

#include <atomic>
#include <thread>

namespace qesc {

const char* survey_outcome_name(SurveyOutcome o, ProblemKind k) {
  switch (o) {
    case SurveyOutcome::Hit:
      return "HIT";
    case SurveyOutcome::Exhausted:
      return "EXHAUSTED";
    case SurveyOutcome::Problem:
      return k == ProblemKind::PrecisionLoss ? "PROBLEM_PRECISION" : "PROBLEM";
  }
  return "?";
}

namespace {

SurveyRecord survey_one(const ParamSegment& seg, const ResolvedConfig& rc) {
  Orbit orbit(seg, rc.loss_threshold);
  for (;;) {
    if (orbit.delta_hit(rc.nbhd) == DeltaHit::Hit) {
      const std::int64_t hit = orbit.n();
      return SurveyRecord{ParamSegment(seg.lo, seg.hi, hit > 0 ? hit - 1 : 0),
                          SurveyOutcome::Hit, ProblemKind::None, hit, -1,
                          orbit.monotone_width()};
    }
    if (orbit.n() == rc.n_max)
      return SurveyRecord{ParamSegment(seg.lo, seg.hi, rc.n_max),
                          SurveyOutcome::Exhausted, ProblemKind::None, -1, -1,
                          std::nullopt};
    const StepStatus st = orbit.step();
    if (st != StepStatus::Ok) {
      const ProblemKind kind = st == StepStatus::MonotonicityFailure
                                   ? ProblemKind::NoSign
                                   : ProblemKind::PrecisionLoss;
      return SurveyRecord{ParamSegment(seg.lo, seg.hi, orbit.n()),
                          SurveyOutcome::Problem, kind, -1,
                          orbit.failed_iter(), std::nullopt};
    }
  }
}

}  // namespace

std::vector<SurveyRecord> run_survey(const ResolvedConfig& rc,
                                     const ProgressFn& progress) {
  int threads = rc.threads;
  if (threads > 1 && !mpfr_buildopt_tls_p()) threads = 1;

  std::vector<ParamSegment> seeds = seed_queue(rc.omega_lo, rc.omega_hi, rc.u);
  const std::size_t total = seeds.size();
  std::vector<std::optional<SurveyRecord>> slots(total);

  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) {
      slots[i] = survey_one(seeds[i], rc);
      if (progress && (i + 1) % 100000 == 0)
        progress(static_cast<std::int64_t>(i + 1),
                 static_cast<std::int64_t>(total - i - 1),
                 static_cast<std::int64_t>(i + 1));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= total) break;
          slots[i] = survey_one(seeds[i], rc);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<SurveyRecord> records;
  records.reserve(total);
  for (auto& s : slots) records.push_back(std::move(*s));
  if (progress)
    progress(static_cast<std::int64_t>(total), 0,
             static_cast<std::int64_t>(total));
  return records;
}

std::vector<SurveyRecord> run_survey(const RunConfig& cfg,
                                     const ProgressFn& progress) {
  return run_survey(resolve(cfg), progress);
}

std::vector<BisectStudyRow> run_bisect_study(const ResolvedConfig& base,
                                             const std::vector<int>& s_range,
                                             const ProgressFn& progress) {
  std::vector<BisectStudyRow> rows;
  rows.reserve(s_range.size());
  for (int s : s_range) {
    if (s < 1) throw ConfigError("s: must be >= 1");
    ResolvedConfig rc = base;
    rc.s = s;
    RunResult res = run_escape(rc);
    const auto& excluded = res.stats_for(Verdict::DeltaExcluded);
    rows.push_back(BisectStudyRow{s, excluded.measure,
                                  res.stats_for(Verdict::Escaped).count,
                                  res.wallclock_seconds});
    if (progress)
      progress(s, 0, static_cast<std::int64_t>(rows.size()));
  }
  return rows;
}

}  // namespace qesc
