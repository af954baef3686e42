#include "qesc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <thread>

namespace qesc {

namespace {

MpFloat parse_real(const std::string& text, mpfr_prec_t prec,
                   const char* field) {
  auto v = MpFloat::parse(text, prec, Round::Zero);
  if (!v || !v->is_finite())
    throw ConfigError(std::string(field) + ": not a finite number: '" + text +
                      "'");
  return std::move(*v);
}

MpFloat width_lower(const ParamSegment& seg) {
  MpFloat w(seg.lo.precision());
  w.sub(seg.hi, seg.lo, Round::Down);
  return w;
}

}  // namespace

ResolvedConfig resolve(const RunConfig& cfg) {
  if (cfg.precision < 53)
    throw ConfigError("precision: must be >= 53 bits");
  if (cfg.precision > (1L << 20))
    throw ConfigError("precision: unreasonably large");
  const mpfr_prec_t prec = static_cast<mpfr_prec_t>(cfg.precision);

  MpFloat omega_lo = parse_real(cfg.omega_lo, prec, "omega_lo");
  MpFloat omega_hi = parse_real(cfg.omega_hi, prec, "omega_hi");
  if (!(omega_lo < omega_hi)) throw ConfigError("omega: requires lo < hi");

  MpFloat delta = parse_real(cfg.delta, prec, "delta");
  if (delta.sign() <= 0) throw ConfigError("delta: must be positive");

  MpFloat w = parse_real(cfg.w, prec, "w");
  if (w.sign() <= 0 || w.cmp_d(1.0) >= 0)
    throw ConfigError("w: must satisfy 0 < w < 1");

  if (cfg.n0 < 1) throw ConfigError("n0: must be >= 1");
  if (cfg.n_max < cfg.n0) throw ConfigError("n_max: must be >= n0");
  if (cfg.u < 1) throw ConfigError("u: must be >= 1");
  if (cfg.s < 1) throw ConfigError("s: must be >= 1");
  if (cfg.threads < 1 || cfg.threads > 1024)
    throw ConfigError("threads: must be in [1, 1024]");
  if (cfg.n_min && *cfg.n_min < 1) throw ConfigError("n_min: must be >= 1");
  if (cfg.i_max && *cfg.i_max < 1) throw ConfigError("i_max: must be >= 1");
  if (cfg.queue_cap && *cfg.queue_cap < 1)
    throw ConfigError("queue_cap: must be >= 1");

  MpFloat omega_width(prec);
  omega_width.sub(omega_hi, omega_lo, Round::Nearest);
  MpFloat min_width(prec);
  min_width.mul(w, omega_width, Round::Nearest);

  MpFloat loss_threshold(prec);
  loss_threshold.div_ui(delta, 10, Round::Down);

  return ResolvedConfig{prec,
                        std::move(omega_lo),
                        std::move(omega_hi),
                        CriticalNbhd(std::move(delta)),
                        std::move(w),
                        std::move(min_width),
                        std::move(loss_threshold),
                        cfg.n0,
                        cfg.n_max,
                        cfg.u,
                        cfg.n_min,
                        cfg.i_max,
                        cfg.queue_cap,
                        cfg.s,
                        cfg.threads};
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Escaped: return "ESCAPED";
    case Verdict::TooSmall: return "TOO_SMALL";
    case Verdict::MaxIter: return "MAX_ITER";
    case Verdict::PrecisionLoss: return "PRECISION_LOSS";
    case Verdict::NoSignMinWidth: return "NO_SIGN_MIN_WIDTH";
    case Verdict::DeltaExcluded: return "DELTA_EXCLUDED";
    case Verdict::QueueLeftover: return "QUEUE_LEFTOVER";
  }
  return "?";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  for (Verdict v : kAllVerdicts)
    if (name == verdict_name(v)) return v;
  return std::nullopt;
}

const VerdictStats& RunResult::stats_for(Verdict v) const {
  for (const auto& st : stats)
    if (st.verdict == v) return st;
  throw DomainError("RunResult: stats not finalized");
}

std::vector<ParamSegment> seed_queue(const MpFloat& omega_lo,
                                     const MpFloat& omega_hi,
                                     std::int64_t u) {
  if (u < 1) throw ConfigError("u: must be >= 1");
  const mpfr_prec_t prec = omega_lo.precision();
  std::vector<ParamSegment> out;
  out.reserve(static_cast<std::size_t>(u));
  if (u == 1) {
    out.emplace_back(omega_lo, omega_hi);
    return out;
  }

  // cut points computed with guard bits so each lands within half an ulp
  // of the exact equi-spaced position, then rounded to working precision
  const mpfr_prec_t guard = prec + 64;
  MpFloat width(guard), t(guard);
  width.sub(omega_hi, omega_lo, Round::Nearest);
  MpFloat prev = omega_lo;
  for (std::int64_t k = 1; k < u; ++k) {
    t.mul_si(width, static_cast<long>(k), Round::Nearest);
    t.div_ui(t, static_cast<unsigned long>(u), Round::Nearest);
    t.add(t, omega_lo, Round::Nearest);
    MpFloat cut(prec);
    cut.set(t, Round::Nearest);
    if (!(prev < cut) || !(cut < omega_hi))
      throw ConfigError("u: subdivision collapses at this precision");
    out.emplace_back(prev, cut);
    prev = std::move(cut);
  }
  out.emplace_back(prev, omega_hi);
  return out;
}

std::optional<std::pair<ParamSegment, ParamSegment>> split_half(
    const ParamSegment& seg) {
  MpFloat mid = midpoint(seg.lo, seg.hi);
  if (!(seg.lo < mid) || !(mid < seg.hi)) return std::nullopt;
  return std::make_pair(ParamSegment(seg.lo, mid, seg.certified_iter),
                        ParamSegment(mid, seg.hi, seg.certified_iter));
}

namespace {

// Which half-line of phase space a kept side must provably map into.
enum class ImageSide { Below, Above };

bool proven_on(ImageSide side, const MpInterval& e, const CriticalNbhd& nbhd) {
  return side == ImageSide::Below ? e.hi() <= nbhd.neg_delta()
                                  : e.lo() >= nbhd.delta();
}

// proven strictly off that half-line, so the bracket may advance
bool proven_off(ImageSide side, const MpInterval& e, const CriticalNbhd& nbhd) {
  return side == ImageSide::Below ? e.lo() > nbhd.neg_delta()
                                  : e.hi() < nbhd.delta();
}

}  // namespace

ChopResult chop_at_delta(const ParamSegment& seg, const Orbit& at_hit,
                         const CriticalNbhd& nbhd, int steps,
                         PointOrbitEval& eval) {
  const std::int64_t n = at_hit.n();
  const std::int64_t cert_side = n;
  const std::int64_t cert_mid = n > 0 ? n - 1 : 0;
  const ImageSide left_side =
      at_hit.orientation() > 0 ? ImageSide::Below : ImageSide::Above;
  const ImageSide right_side =
      at_hit.orientation() > 0 ? ImageSide::Above : ImageSide::Below;

  // left boundary: largest cut with [seg.lo, cut] provably clear
  MpFloat cut_lo = seg.lo;
  if (proven_on(left_side, at_hit.endpoint_lo_enclosure(), nbhd)) {
    MpFloat good = seg.lo, bad = seg.hi;
    for (int k = 0; k < steps; ++k) {
      MpFloat m = midpoint(good, bad);
      if (!(good < m) || !(m < bad)) break;
      const MpInterval& e = eval.eval(m, n);
      if (proven_on(left_side, e, nbhd))
        good = std::move(m);
      else if (proven_off(left_side, e, nbhd))
        bad = std::move(m);
      else
        break;  // enclosure straddles the threshold: keep the bracket
    }
    cut_lo = std::move(good);
  }

  // right boundary, mirrored
  MpFloat cut_hi = seg.hi;
  if (proven_on(right_side, at_hit.endpoint_hi_enclosure(), nbhd)) {
    MpFloat good = seg.hi, bad = seg.lo;
    for (int k = 0; k < steps; ++k) {
      MpFloat m = midpoint(bad, good);
      if (!(bad < m) || !(m < good)) break;
      const MpInterval& e = eval.eval(m, n);
      if (proven_on(right_side, e, nbhd))
        good = std::move(m);
      else if (proven_off(right_side, e, nbhd))
        bad = std::move(m);
      else
        break;
    }
    cut_hi = std::move(good);
  }

  // final certificate per kept side; failures fold into the middle
  std::optional<ParamSegment> left, right;
  if (cut_lo > seg.lo && proven_on(left_side, eval.eval(cut_lo, n), nbhd))
    left.emplace(seg.lo, cut_lo, cert_side);
  else
    cut_lo = seg.lo;
  if (cut_hi < seg.hi && proven_on(right_side, eval.eval(cut_hi, n), nbhd))
    right.emplace(cut_hi, seg.hi, cert_side);
  else
    cut_hi = seg.hi;

  return ChopResult{std::move(left), std::move(right),
                    ParamSegment(std::move(cut_lo), std::move(cut_hi),
                                 cert_mid)};
}

namespace {

struct ProcessOutcome {
  std::vector<ClassifiedSegment> terminal;
  std::vector<ParamSegment> children;
};

class Worker {
 public:
  explicit Worker(const ResolvedConfig& rc)
      : rc_(rc), eval_(rc.precision) {}

  ProcessOutcome process(const ParamSegment& seg) {
    ProcessOutcome out;
    Orbit orbit(seg, rc_.loss_threshold);
    for (;;) {
      if (orbit.delta_hit(rc_.nbhd) == DeltaHit::Hit) {
        const std::int64_t hit = orbit.n();
        const std::int64_t cert = hit > 0 ? hit - 1 : 0;
        if (orbit.escape_check(rc_.nbhd, rc_.n0)) {
          out.terminal.push_back(
              ClassifiedSegment{ParamSegment(seg.lo, seg.hi, cert),
                                Verdict::Escaped, hit, hit,
                                orbit.monotone_width()});
          return out;
        }
        ChopResult chop = chop_at_delta(seg, orbit, rc_.nbhd, rc_.s, eval_);
        if (chop.left) emit_side(out, std::move(*chop.left), hit);
        out.terminal.push_back(ClassifiedSegment{std::move(chop.excluded),
                                                 Verdict::DeltaExcluded, -1,
                                                 hit, std::nullopt});
        if (chop.right) emit_side(out, std::move(*chop.right), hit);
        return out;
      }
      // every iterate certified clear of the neighbourhood so far is a
      // candidate escape time; a wide-enough image certifies right here,
      // before any later encounter can force a chop
      if (orbit.n() >= rc_.n0 && orbit.escape_check(rc_.nbhd, rc_.n0)) {
        out.terminal.push_back(
            ClassifiedSegment{ParamSegment(seg.lo, seg.hi, orbit.n()),
                              Verdict::Escaped, orbit.n(), -1,
                              orbit.monotone_width()});
        return out;
      }
      if (orbit.n() == rc_.n_max) {
        out.terminal.push_back(
            ClassifiedSegment{ParamSegment(seg.lo, seg.hi, rc_.n_max),
                              Verdict::MaxIter, -1, -1, std::nullopt});
        return out;
      }
      const StepStatus st = orbit.step();
      if (st == StepStatus::Ok) continue;

      const std::int64_t cert = orbit.n();  // disjoint through n
      const Verdict fail_verdict = st == StepStatus::MonotonicityFailure
                                       ? Verdict::NoSignMinWidth
                                       : Verdict::PrecisionLoss;
      auto halves = split_half(ParamSegment(seg.lo, seg.hi, cert));
      if (!halves) {
        // indivisible at this precision
        out.terminal.push_back(
            ClassifiedSegment{ParamSegment(seg.lo, seg.hi, cert),
                              Verdict::PrecisionLoss, -1, -1, std::nullopt});
        return out;
      }
      emit_half(out, std::move(halves->first), fail_verdict);
      emit_half(out, std::move(halves->second), fail_verdict);
      return out;
    }
  }

 private:
  void emit_side(ProcessOutcome& out, ParamSegment side, std::int64_t hit) {
    if (width_lower(side) >= rc_.min_width) {
      out.children.push_back(std::move(side));
    } else {
      out.terminal.push_back(ClassifiedSegment{
          std::move(side), Verdict::TooSmall, -1, hit, std::nullopt});
    }
  }

  void emit_half(ProcessOutcome& out, ParamSegment half, Verdict fail_verdict) {
    if (width_lower(half) >= rc_.min_width) {
      out.children.push_back(std::move(half));
    } else {
      out.terminal.push_back(ClassifiedSegment{
          std::move(half), fail_verdict, -1, -1, std::nullopt});
    }
  }

  const ResolvedConfig& rc_;
  PointOrbitEval eval_;
};

void finalize(RunResult& res, const ResolvedConfig& rc) {
  std::sort(res.classified.begin(), res.classified.end(),
            [](const ClassifiedSegment& a, const ClassifiedSegment& b) {
              return a.segment.lo < b.segment.lo;
            });
  res.stats.clear();
  for (Verdict v : kAllVerdicts)
    res.stats.push_back(VerdictStats{
        v, 0,
        WidthBounds{MpFloat::zero(rc.precision), MpFloat::zero(rc.precision)}});
  for (const auto& c : res.classified) {
    auto& st = res.stats[static_cast<std::size_t>(c.verdict)];
    ++st.count;
    WidthBounds wb = c.segment.width();
    st.measure.lower.add(st.measure.lower, wb.lower, Round::Down);
    st.measure.upper.add(st.measure.upper, wb.upper, Round::Up);
  }
}

}  // namespace

RunResult run_escape(const ResolvedConfig& rc, const ProgressFn& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  int threads = rc.threads;
  if (threads > 1 && !mpfr_buildopt_tls_p()) threads = 1;

  RunResult res;
  std::deque<ParamSegment> queue;
  for (auto& s : seed_queue(rc.omega_lo, rc.omega_hi, rc.u))
    queue.push_back(std::move(s));
  res.max_queue_depth = static_cast<std::int64_t>(queue.size());

  const bool use_nmin = rc.n_min.has_value();
  std::int64_t below_nmin = 0;
  if (use_nmin)
    for (const auto& s : queue)
      if (s.certified_iter < *rc.n_min) ++below_nmin;

  std::vector<Worker> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) workers.emplace_back(rc);

  std::vector<ParamSegment> batch;
  std::vector<ProcessOutcome> outcomes;

  auto leftover = [](ParamSegment seg) {
    return ClassifiedSegment{std::move(seg), Verdict::QueueLeftover, -1, -1,
                             std::nullopt};
  };
  // classifies everything not yet logically processed
  auto drain = [&](const char* reason, std::size_t batch_from) {
    res.stopped_early = true;
    res.stop_reason = reason;
    for (std::size_t i = batch_from; i < batch.size(); ++i)
      res.classified.push_back(leftover(std::move(batch[i])));
    while (!queue.empty()) {
      res.classified.push_back(leftover(std::move(queue.front())));
      queue.pop_front();
    }
  };

  bool stopped = false;
  while (!queue.empty() && !stopped) {
    if (rc.i_max && res.processed >= *rc.i_max) {
      batch.clear();
      drain("i_max", 0);
      break;
    }
    if (use_nmin && below_nmin == 0) {
      batch.clear();
      drain("n_min", 0);
      break;
    }

    std::size_t take = queue.size();
    if (rc.i_max)
      take = std::min<std::size_t>(
          take, static_cast<std::size_t>(*rc.i_max - res.processed));
    batch.clear();
    for (std::size_t i = 0; i < take; ++i) {
      batch.push_back(std::move(queue.front()));
      queue.pop_front();
    }

    outcomes.clear();
    outcomes.resize(take);
    if (threads == 1) {
      for (std::size_t i = 0; i < take; ++i)
        outcomes[i] = workers[0].process(batch[i]);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= take) break;
            outcomes[i] = workers[static_cast<std::size_t>(t)].process(
                batch[i]);
          }
        });
      }
      for (auto& th : pool) th.join();
    }

    // replay the batch in queue order so counters, stop conditions and the
    // output are those of a strictly sequential FIFO run
    for (std::size_t i = 0; i < take; ++i) {
      if (use_nmin && below_nmin == 0) {
        drain("n_min", i);
        stopped = true;
        break;
      }
      if (use_nmin && batch[i].certified_iter < *rc.n_min) --below_nmin;
      ++res.processed;
      auto& out = outcomes[i];
      for (auto& c : out.terminal) res.classified.push_back(std::move(c));
      for (auto& ch : out.children) {
        if (use_nmin && ch.certified_iter < *rc.n_min) ++below_nmin;
        queue.push_back(std::move(ch));
      }
      const std::int64_t logical_depth =
          static_cast<std::int64_t>(queue.size()) +
          static_cast<std::int64_t>(take - i - 1);
      if (logical_depth > res.max_queue_depth)
        res.max_queue_depth = logical_depth;
      if (rc.queue_cap && logical_depth > *rc.queue_cap) {
        drain("queue_cap", i + 1);
        stopped = true;
        break;
      }
    }
    if (progress)
      progress(res.processed, static_cast<std::int64_t>(queue.size()),
               static_cast<std::int64_t>(res.classified.size()));
  }

  finalize(res, rc);
  res.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

RunResult run_escape(const RunConfig& cfg, const ProgressFn& progress) {
  return run_escape(resolve(cfg), progress);
}

bool replay_escape(const ParamSegment& seg, std::int64_t escape_time,
                   const ResolvedConfig& cfg) {
  Orbit orbit(seg, cfg.loss_threshold);
  for (std::int64_t i = 0; i < escape_time; ++i) {
    if (orbit.delta_hit(cfg.nbhd) != DeltaHit::Disjoint) return false;
    if (orbit.step() != StepStatus::Ok) return false;
  }
  return orbit.escape_check(cfg.nbhd, cfg.n0);
}

}  // namespace qesc
