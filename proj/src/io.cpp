#include "qesc/io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace qesc {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string dec_lower(const MpFloat& x) {
  return x.to_decimal_sci(12, Round::Down);
}
std::string dec_upper(const MpFloat& x) {
  return x.to_decimal_sci(12, Round::Up);
}
// fixed-point form used for aggregate measures
std::string dec12f(const MpFloat& x, Round r) {
  return x.to_decimal_fixed(12, r);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

MpFloat parse_hex_field(const std::string& s, mpfr_prec_t prec,
                        const char* what) {
  auto v = MpFloat::parse(s, prec, Round::Nearest);
  if (!v) throw ParseError(std::string("bad ") + what + ": '" + s + "'");
  return std::move(*v);
}

std::int64_t parse_int_field(const std::string& s, const char* what) {
  try {
    return std::stoll(s);
  } catch (...) {
    throw ParseError(std::string("bad ") + what + ": '" + s + "'");
  }
}

ordered_json measure_json(const WidthBounds& m) {
  return ordered_json{{"lower_dec", dec12f(m.lower, Round::Down)},
                      {"lower_rounding", "down"},
                      {"upper_dec", dec12f(m.upper, Round::Up)},
                      {"upper_rounding", "up"},
                      {"lower_hex", m.lower.to_hex()},
                      {"upper_hex", m.upper.to_hex()}};
}

}  // namespace

void write_results_csv(std::ostream& out, const RunResult& res) {
  out << "verdict,lo_hex,hi_hex,width_dec_lower,certifiedIter,escapeTime,"
         "widthAtEscape_dec_lower,hitIter\n";
  MpFloat w(res.classified.empty()
                ? 53
                : res.classified.front().segment.lo.precision());
  for (const auto& c : res.classified) {
    w.sub(c.segment.hi, c.segment.lo, Round::Down);
    out << verdict_name(c.verdict) << ',' << c.segment.lo.to_hex() << ','
        << c.segment.hi.to_hex() << ',' << dec_lower(w) << ','
        << c.segment.certified_iter << ',';
    if (c.escape_time >= 0) out << c.escape_time;
    out << ',';
    if (c.width_at_escape) out << dec_lower(c.width_at_escape->lower);
    out << ',';
    if (c.hit_iter >= 0) out << c.hit_iter;
    out << '\n';
  }
}

std::vector<ClassifiedSegment> read_results_csv(std::istream& in,
                                                mpfr_prec_t prec) {
  std::vector<ClassifiedSegment> rows;
  std::string line;
  if (!std::getline(in, line) || line.rfind("verdict,", 0) != 0)
    throw ParseError("results CSV: missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 8)
      throw ParseError("results CSV line " + std::to_string(lineno) +
                       ": expected 8 fields");
    auto verdict = verdict_from_name(f[0]);
    if (!verdict)
      throw ParseError("results CSV line " + std::to_string(lineno) +
                       ": unknown verdict '" + f[0] + "'");
    ParamSegment seg(parse_hex_field(f[1], prec, "lo_hex"),
                     parse_hex_field(f[2], prec, "hi_hex"),
                     parse_int_field(f[4], "certifiedIter"));
    ClassifiedSegment c{std::move(seg), *verdict, -1, -1, std::nullopt};
    if (!f[5].empty()) c.escape_time = parse_int_field(f[5], "escapeTime");
    if (!f[6].empty()) {
      // decimal lower bound, printed rounded down: re-read rounded down so
      // the stored value remains a valid lower bound
      auto wlo = MpFloat::parse(f[6], prec, Round::Down);
      if (!wlo) throw ParseError("bad widthAtEscape field");
      c.width_at_escape = WidthBounds{*wlo, MpFloat::pos_inf(prec)};
    }
    if (!f[7].empty()) c.hit_iter = parse_int_field(f[7], "hitIter");
    rows.push_back(std::move(c));
  }
  return rows;
}

void write_survey_csv(std::ostream& out,
                      const std::vector<SurveyRecord>& records) {
  out << "lo_hex,hi_hex,outcome,firstHit,widthAtHit_dec_lower,"
         "widthAtHit_dec_upper\n";
  for (const auto& r : records) {
    out << r.segment.lo.to_hex() << ',' << r.segment.hi.to_hex() << ','
        << survey_outcome_name(r.outcome, r.problem) << ',';
    if (r.outcome == SurveyOutcome::Hit)
      out << r.first_hit;
    else if (r.outcome == SurveyOutcome::Problem)
      out << r.fail_iter;
    out << ',';
    if (r.width_at_hit)
      out << dec_lower(r.width_at_hit->lower) << ','
          << dec_upper(r.width_at_hit->upper);
    else
      out << ',';
    out << '\n';
  }
}

std::vector<SurveyRecord> read_survey_csv(std::istream& in, mpfr_prec_t prec) {
  std::vector<SurveyRecord> rows;
  std::string line;
  if (!std::getline(in, line) || line.rfind("lo_hex,", 0) != 0)
    throw ParseError("survey CSV: missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 6)
      throw ParseError("survey CSV line " + std::to_string(lineno) +
                       ": expected 6 fields");
    ParamSegment seg(parse_hex_field(f[0], prec, "lo_hex"),
                     parse_hex_field(f[1], prec, "hi_hex"));
    SurveyOutcome outcome;
    ProblemKind kind = ProblemKind::None;
    if (f[2] == "HIT") {
      outcome = SurveyOutcome::Hit;
    } else if (f[2] == "EXHAUSTED") {
      outcome = SurveyOutcome::Exhausted;
    } else if (f[2] == "PROBLEM") {
      outcome = SurveyOutcome::Problem;
      kind = ProblemKind::NoSign;
    } else if (f[2] == "PROBLEM_PRECISION") {
      outcome = SurveyOutcome::Problem;
      kind = ProblemKind::PrecisionLoss;
    } else {
      throw ParseError("survey CSV line " + std::to_string(lineno) +
                       ": unknown outcome '" + f[2] + "'");
    }
    SurveyRecord r{std::move(seg), outcome, kind, -1, -1, std::nullopt};
    if (outcome == SurveyOutcome::Hit)
      r.first_hit = parse_int_field(f[3], "firstHit");
    else if (outcome == SurveyOutcome::Problem)
      r.fail_iter = parse_int_field(f[3], "firstHit");
    if (!f[4].empty() && !f[5].empty()) {
      auto wlo = MpFloat::parse(f[4], prec, Round::Down);
      auto whi = MpFloat::parse(f[5], prec, Round::Up);
      if (!wlo || !whi) throw ParseError("bad widthAtHit field");
      r.width_at_hit = WidthBounds{std::move(*wlo), std::move(*whi)};
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_study_csv(std::ostream& out,
                     const std::vector<BisectStudyRow>& rows) {
  out << "s,excluded_dec_lower,excluded_dec_upper,wallclock_seconds\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.3f", r.wallclock_seconds);
    out << r.s << ',' << dec12f(r.excluded.lower, Round::Down) << ','
        << dec12f(r.excluded.upper, Round::Up) << ',' << buf << '\n';
  }
}

void write_curve_csv(std::ostream& out, const MeasureCurve& curve) {
  out << "threshold,measure_dec_lower,measure_dec_upper,count\n";
  for (const auto& p : curve) {
    out << p.threshold.to_decimal_sci(12, Round::Nearest) << ','
        << dec12f(p.measure.lower, Round::Down) << ','
        << dec12f(p.measure.upper, Round::Up) << ',' << p.count << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const WidthHistogram& h) {
  out << "bucket,width_from,width_to,measure_dec_lower,measure_dec_upper,"
         "count\n";
  char from[40], to[40];
  for (int k = 0; k < h.slot_count; ++k) {
    std::snprintf(from, sizeof from, "%.6e", h.boundary(k));
    std::snprintf(to, sizeof to, "%.6e", h.boundary(k + 1));
    const auto& slot = h.slots[static_cast<std::size_t>(k)];
    out << k << ',' << from << ',' << to << ','
        << dec12f(slot.measure.lower, Round::Down) << ','
        << dec12f(slot.measure.upper, Round::Up) << ',' << slot.count << '\n';
  }
}

void write_subranges_json(std::ostream& out,
                          const std::vector<SubrangeSummary>& summaries) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : summaries) {
    ordered_json pie = ordered_json::array();
    for (const auto& slice : s.pie) {
      pie.push_back(ordered_json{{"width_from", slice.width_from},
                                 {"width_to", slice.width_to},
                                 {"count", slice.count},
                                 {"measure", measure_json(slice.measure)},
                                 {"merged_tail", slice.merged_tail}});
    }
    arr.push_back(ordered_json{
        {"range_lo", s.range_lo.to_decimal_sci(12, Round::Nearest)},
        {"range_hi", s.range_hi.to_decimal_sci(12, Round::Nearest)},
        {"range_lo_hex", s.range_lo.to_hex()},
        {"range_hi_hex", s.range_hi.to_hex()},
        {"escaped_count", s.escaped_count},
        {"escaped_measure", measure_json(s.escaped_measure)},
        {"mu_percent_lower", dec12f(s.mu_percent.lower, Round::Down)},
        {"mu_percent_upper", dec12f(s.mu_percent.upper, Round::Up)},
        {"pie", std::move(pie)}});
  }
  out << arr.dump(2) << '\n';
}

void write_summary_json(std::ostream& out, const RunConfig& cfg,
                        const ResolvedConfig& rc, const RunResult& res) {
  ordered_json j;
  j["note"] =
      "decimal measures are directed-rounded as labelled; hex values are "
      "exact";
  ordered_json c;
  c["omega_lo"] = cfg.omega_lo;
  c["omega_hi"] = cfg.omega_hi;
  c["omega_lo_hex"] = rc.omega_lo.to_hex();
  c["omega_hi_hex"] = rc.omega_hi.to_hex();
  c["delta"] = cfg.delta;
  c["delta_hex"] = rc.nbhd.delta().to_hex();
  c["sqrt_delta_up_hex"] = rc.nbhd.sqrt_delta_up().to_hex();
  c["n0"] = rc.n0;
  c["n_max"] = rc.n_max;
  if (rc.n_min)
    c["n_min"] = *rc.n_min;
  else
    c["n_min"] = nullptr;
  c["u"] = rc.u;
  c["w"] = cfg.w;
  c["min_width_hex"] = rc.min_width.to_hex();
  c["s"] = rc.s;
  c["precision"] = static_cast<long>(rc.precision);
  if (rc.i_max)
    c["i_max"] = *rc.i_max;
  else
    c["i_max"] = nullptr;
  if (rc.queue_cap)
    c["queue_cap"] = *rc.queue_cap;
  else
    c["queue_cap"] = nullptr;
  c["threads"] = rc.threads;
  j["config"] = std::move(c);

  ordered_json counts, measures;
  std::int64_t total = 0;
  for (const auto& st : res.stats) {
    counts[verdict_name(st.verdict)] = st.count;
    total += st.count;
    measures[verdict_name(st.verdict)] = measure_json(st.measure);
  }
  counts["total"] = total;
  j["counts"] = std::move(counts);
  j["measures"] = std::move(measures);
  j["counters"] = ordered_json{{"processed", res.processed},
                               {"max_queue_depth", res.max_queue_depth}};
  j["stopped_early"] = res.stopped_early;
  j["stop_reason"] = res.stop_reason;
  j["wallclock_seconds"] = res.wallclock_seconds;
  out << j.dump(2) << '\n';
}

void write_results_json(std::ostream& out, const RunResult& res) {
  ordered_json arr = ordered_json::array();
  MpFloat w(res.classified.empty()
                ? 53
                : res.classified.front().segment.lo.precision());
  for (const auto& c : res.classified) {
    w.sub(c.segment.hi, c.segment.lo, Round::Down);
    ordered_json row{{"verdict", verdict_name(c.verdict)},
                     {"lo_hex", c.segment.lo.to_hex()},
                     {"hi_hex", c.segment.hi.to_hex()},
                     {"width_dec_lower", dec_lower(w)},
                     {"certifiedIter", c.segment.certified_iter}};
    if (c.escape_time >= 0) row["escapeTime"] = c.escape_time;
    if (c.width_at_escape)
      row["widthAtEscape_dec_lower"] = dec_lower(c.width_at_escape->lower);
    if (c.hit_iter >= 0) row["hitIter"] = c.hit_iter;
    arr.push_back(std::move(row));
  }
  out << arr.dump(2) << '\n';
}

void write_survey_json(std::ostream& out,
                       const std::vector<SurveyRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) {
    ordered_json row{{"lo_hex", r.segment.lo.to_hex()},
                     {"hi_hex", r.segment.hi.to_hex()},
                     {"outcome", survey_outcome_name(r.outcome, r.problem)}};
    if (r.outcome == SurveyOutcome::Hit) row["firstHit"] = r.first_hit;
    if (r.outcome == SurveyOutcome::Problem) row["failIter"] = r.fail_iter;
    if (r.width_at_hit) {
      row["widthAtHit_dec_lower"] = dec_lower(r.width_at_hit->lower);
      row["widthAtHit_dec_upper"] = dec_upper(r.width_at_hit->upper);
    }
    arr.push_back(std::move(row));
  }
  out << arr.dump(2) << '\n';
}

void write_study_json(std::ostream& out,
                      const std::vector<BisectStudyRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back(
        ordered_json{{"s", r.s},
                     {"excluded", measure_json(r.excluded)},
                     {"escaped_count", r.escaped_count},
                     {"wallclock_seconds", r.wallclock_seconds}});
  }
  out << arr.dump(2) << '\n';
}

std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("config line " + std::to_string(lineno) +
                       ": empty key");
    out[key] = value;
  }
  return out;
}

}  // namespace qesc
