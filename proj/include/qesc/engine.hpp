#ifndef QESC_ENGINE_HPP
#define QESC_ENGINE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qesc/orbit.hpp"

namespace qesc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// User-facing run parameters. Real-valued knobs are decimal (or hex-float)
// strings so that conversion to the working precision happens exactly once,
// at resolve time, toward zero; the effective binary values are what the
// run reports.
struct RunConfig {
  std::string omega_lo = "1.4";
  std::string omega_hi = "2";
  std::string delta = "1e-3";
  std::int64_t n0 = 25;
  std::int64_t n_max = 200;
  std::optional<std::int64_t> n_min;
  // Initial uniform subdivision. The default granularity of 2e-3 keeps the
  // starting pieces wide enough that slow-contracting spans near periodic
  // windows can still certify a wide image before fragmenting; finer
  // seeding visibly shrinks the certified family.
  std::int64_t u = 300;
  std::string w = "1e-10";         // minimum width as a fraction of |omega|
  int s = 40;                      // bisection steps per chop boundary
  long precision = 250;            // significand bits
  std::optional<std::int64_t> i_max;
  std::optional<std::int64_t> queue_cap;
  int threads = 1;
};

struct ResolvedConfig {
  mpfr_prec_t precision;
  MpFloat omega_lo, omega_hi;
  CriticalNbhd nbhd;
  MpFloat w_fraction;      // minimum width as a fraction of |omega|
  MpFloat min_width;       // w * |omega|
  MpFloat loss_threshold;  // delta / 10, rounded down
  std::int64_t n0, n_max, u;
  std::optional<std::int64_t> n_min, i_max, queue_cap;
  int s = 40;
  int threads = 1;
};

// Validates and converts; throws ConfigError naming the offending field.
ResolvedConfig resolve(const RunConfig& cfg);

enum class Verdict {
  Escaped,
  TooSmall,
  MaxIter,
  PrecisionLoss,
  NoSignMinWidth,
  DeltaExcluded,
  QueueLeftover,
};

inline constexpr std::array<Verdict, 7> kAllVerdicts = {
    Verdict::Escaped,        Verdict::TooSmall,      Verdict::MaxIter,
    Verdict::PrecisionLoss,  Verdict::NoSignMinWidth, Verdict::DeltaExcluded,
    Verdict::QueueLeftover,
};

const char* verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct ClassifiedSegment {
  ParamSegment segment;
  Verdict verdict;
  std::int64_t escape_time = -1;  // ESCAPED only
  std::int64_t hit_iter = -1;     // iterate of the delta encounter, if any
  std::optional<WidthBounds> width_at_escape;  // ESCAPED only
};

struct VerdictStats {
  Verdict verdict;
  std::int64_t count = 0;
  WidthBounds measure;  // directed-rounded total width of the family
};

struct RunResult {
  // sorted by segment.lo; interiors are pairwise disjoint and the union
  // tiles omega exactly
  std::vector<ClassifiedSegment> classified;
  std::vector<VerdictStats> stats;  // one entry per verdict, fixed order
  std::int64_t processed = 0;
  std::int64_t max_queue_depth = 0;
  bool stopped_early = false;
  std::string stop_reason;  // "i_max" | "queue_cap" | "n_min" when early
  double wallclock_seconds = 0;

  const VerdictStats& stats_for(Verdict v) const;
};

// u exact-endpoint segments with pairwise disjoint interiors tiling
// [omega_lo, omega_hi], widths equal to |omega|/u within 1 ulp.
std::vector<ParamSegment> seed_queue(const MpFloat& omega_lo,
                                     const MpFloat& omega_hi, std::int64_t u);

// Split at the representable midpoint; the halves tile the segment exactly
// and inherit certified_iter. nullopt when the segment spans <= 1 ulp.
std::optional<std::pair<ParamSegment, ParamSegment>> split_half(
    const ParamSegment& seg);

struct ChopResult {
  std::optional<ParamSegment> left;
  std::optional<ParamSegment> right;
  ParamSegment excluded;
};

// Splits a segment whose iterate-N image meets the critical neighbourhood
// into up to three parts: a rigorous outer enclosure of the preimage of
// (-delta, delta) under c_N, plus the certified-disjoint side pieces.
//
// Each boundary is located by bisection on thin-parameter orbit
// evaluations, moving a bracket side only when its relation to the
// threshold is proven, with at most `steps` midpoint evaluations; an
// unprovable midpoint stops refinement with the conservative bracket.
// Every kept side is then re-certified by a final thin evaluation at the
// cut point; a side that fails folds into the excluded piece.
//
// Requires: orbit is at the hit iterate (monotone, hull meets the
// neighbourhood). Side pieces carry certified_iter = N, the excluded
// piece N-1.
ChopResult chop_at_delta(const ParamSegment& seg, const Orbit& at_hit,
                         const CriticalNbhd& nbhd, int steps,
                         PointOrbitEval& eval);

using ProgressFn =
    std::function<void(std::int64_t processed, std::int64_t queued,
                       std::int64_t classified)>;

// The main loop: seed omega uniformly into a FIFO queue; for each segment,
// rebuild the orbit from iterate 0 and run to the first of delta hit,
// monotonicity failure, precision loss, or n_max; classify or chop/split
// and requeue as configured. The result is a pure function of the
// configuration, independent of thread count.
RunResult run_escape(const ResolvedConfig& cfg,
                     const ProgressFn& progress = nullptr);
RunResult run_escape(const RunConfig& cfg,
                     const ProgressFn& progress = nullptr);

// Independent re-derivation of an ESCAPED certificate: fresh orbit,
// disjoint at every iterate below escape_time, hit with sufficient
// monotone width at escape_time.
bool replay_escape(const ParamSegment& seg, std::int64_t escape_time,
                   const ResolvedConfig& cfg);

}  // namespace qesc

#endif
