#include "qesc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qesc/io.hpp"

namespace qesc {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  RunConfig run;
  std::vector<std::string> omega;  // two values when given
  std::int64_t n_min = -1, i_max = -1, queue_cap = -1;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string config_path;
};

void add_run_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--omega", o.omega,
                  "parameter window endpoints LO HI (decimal or hex-float)")
      ->expected(2);
  cmd->add_option("--delta", o.run.delta,
                  "critical neighbourhood radius (default 1e-3)");
  cmd->add_option("--n0", o.run.n0, "requested escape time (default 25)");
  cmd->add_option("--nmax", o.run.n_max,
                  "iteration cap per segment (default 200)");
  cmd->add_option("--nmin", o.n_min,
                  "stop once every queued segment is certified this far");
  cmd->add_option("--subdiv", o.run.u,
                  "initial uniform subdivision count (default 300)");
  cmd->add_option("--min-width-frac", o.run.w,
                  "minimum segment width as a fraction of |omega| "
                  "(default 1e-10)");
  cmd->add_option("--bisect-steps", o.run.s,
                  "bisection steps per chop boundary (default 40)");
  cmd->add_option("--precision", o.run.precision,
                  "significand bits (default 250)");
  cmd->add_option("--imax", o.i_max, "cap on processed segments");
  cmd->add_option("--queue-cap", o.queue_cap, "cap on queue size");
  cmd->add_option("--threads", o.run.threads,
                  "worker threads; output is thread-count independent "
                  "(default 1)");
  cmd->add_option("--out", o.out_dir, "output directory (default .)");
  cmd->add_option("--format", o.format, "results encoding")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--config", o.config_path,
                  "flat key = value file; flags override file values");
}

std::int64_t config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  }
}

// file values fill in whatever the command line left untouched; keys match
// the long flag names
void apply_config_file(const CLI::App* cmd, CommonOpts& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw ConfigError("config: cannot read " + o.config_path);
  std::map<std::string, std::string> kv;
  try {
    kv = parse_flat_config(in);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
  for (const auto& [key, value] : kv) {
    if (key == "omega") {
      if (given("--omega")) continue;
      std::istringstream ss(value);
      std::string lo, hi, extra;
      if (!(ss >> lo >> hi) || (ss >> extra))
        throw ConfigError("config: omega expects two values, got '" + value +
                          "'");
      o.omega = {lo, hi};
    } else if (key == "delta") {
      if (!given("--delta")) o.run.delta = value;
    } else if (key == "n0") {
      if (!given("--n0")) o.run.n0 = config_int(key, value);
    } else if (key == "nmax") {
      if (!given("--nmax")) o.run.n_max = config_int(key, value);
    } else if (key == "nmin") {
      if (!given("--nmin")) o.n_min = config_int(key, value);
    } else if (key == "subdiv") {
      if (!given("--subdiv")) o.run.u = config_int(key, value);
    } else if (key == "min-width-frac") {
      if (!given("--min-width-frac")) o.run.w = value;
    } else if (key == "bisect-steps") {
      if (!given("--bisect-steps"))
        o.run.s = static_cast<int>(config_int(key, value));
    } else if (key == "precision") {
      if (!given("--precision"))
        o.run.precision = static_cast<long>(config_int(key, value));
    } else if (key == "imax") {
      if (!given("--imax")) o.i_max = config_int(key, value);
    } else if (key == "queue-cap") {
      if (!given("--queue-cap")) o.queue_cap = config_int(key, value);
    } else if (key == "threads") {
      if (!given("--threads"))
        o.run.threads = static_cast<int>(config_int(key, value));
    } else if (key == "out") {
      if (!given("--out")) o.out_dir = value;
    } else if (key == "format") {
      if (!given("--format")) o.format = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

RunConfig finish_config(const CommonOpts& o) {
  RunConfig cfg = o.run;
  if (o.omega.size() == 2) {
    cfg.omega_lo = o.omega[0];
    cfg.omega_hi = o.omega[1];
  } else if (!o.omega.empty()) {
    throw ConfigError("omega: expects exactly two values");
  }
  if (o.n_min >= 0) cfg.n_min = o.n_min;
  if (o.i_max >= 0) cfg.i_max = o.i_max;
  if (o.queue_cap >= 0) cfg.queue_cap = o.queue_cap;
  return cfg;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out)
    throw ConfigError("out: cannot write " + path.string());
  return out;
}

void log_line(const std::string& msg) { std::cerr << "[qesc] " << msg << "\n"; }

ProgressFn make_progress(const char* what) {
  return [what](std::int64_t processed, std::int64_t queued,
                std::int64_t classified) {
    std::cerr << "[qesc] " << what << ": processed=" << processed
              << " queued=" << queued << " classified=" << classified << "\n";
  };
}

int cmd_escape(const CommonOpts& o) {
  RunConfig cfg = finish_config(o);
  ResolvedConfig rc = resolve(cfg);
  log_line("escape: starting");
  RunResult res = run_escape(rc, make_progress("escape"));
  {
    auto out = open_output(o.out_dir, o.format == "json" ? "results.json"
                                                         : "results.csv");
    if (o.format == "json")
      write_results_json(out, res);
    else
      write_results_csv(out, res);
  }
  {
    auto out = open_output(o.out_dir, "summary.json");
    write_summary_json(out, cfg, rc, res);
  }
  log_line("escape: done, ESCAPED measure lower bound = " +
           res.stats_for(Verdict::Escaped)
               .measure.lower.to_decimal_fixed(12, Round::Down));
  return 0;
}

int cmd_survey(const CommonOpts& o) {
  RunConfig cfg = finish_config(o);
  ResolvedConfig rc = resolve(cfg);
  log_line("survey: starting");
  auto records = run_survey(rc, make_progress("survey"));
  auto out = open_output(o.out_dir,
                         o.format == "json" ? "survey.json" : "survey.csv");
  if (o.format == "json")
    write_survey_json(out, records);
  else
    write_survey_csv(out, records);
  log_line("survey: done, " + std::to_string(records.size()) + " records");
  return 0;
}

int cmd_bisect_study(const CommonOpts& o, int s_from, int s_to, int s_step) {
  if (s_from < 1 || s_to < s_from || s_step < 1)
    throw ConfigError("s-range: requires 1 <= from <= to and step >= 1");
  RunConfig cfg = finish_config(o);
  ResolvedConfig rc = resolve(cfg);
  std::vector<int> s_range;
  for (int s = s_from; s <= s_to; s += s_step) s_range.push_back(s);
  log_line("bisect-study: " + std::to_string(s_range.size()) + " runs");
  auto rows = run_bisect_study(rc, s_range, make_progress("bisect-study"));
  auto out = open_output(o.out_dir,
                         o.format == "json" ? "study.json" : "study.csv");
  if (o.format == "json")
    write_study_json(out, rows);
  else
    write_study_csv(out, rows);
  return 0;
}

std::vector<std::pair<MpFloat, MpFloat>> parse_ranges(
    const std::vector<std::string>& specs, mpfr_prec_t prec) {
  std::vector<std::pair<MpFloat, MpFloat>> out;
  for (const auto& spec : specs) {
    std::istringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto colon = part.find(':');
      if (colon == std::string::npos)
        throw ConfigError("ranges: expected LO:HI, got '" + part + "'");
      auto lo = MpFloat::parse(part.substr(0, colon), prec, Round::Zero);
      auto hi = MpFloat::parse(part.substr(colon + 1), prec, Round::Zero);
      if (!lo || !hi || !(*lo < *hi))
        throw ConfigError("ranges: bad range '" + part + "'");
      out.emplace_back(std::move(*lo), std::move(*hi));
    }
  }
  return out;
}

int cmd_report(const std::string& in_path, const std::string& out_dir,
               int histogram_slots, const std::vector<std::string>& ranges,
               long precision, std::int64_t curve_n_max,
               const std::string& width_thresholds) {
  if (precision < 53) throw ConfigError("precision: must be >= 53 bits");
  const mpfr_prec_t prec = static_cast<mpfr_prec_t>(precision);

  std::ifstream in(in_path);
  if (!in) throw ConfigError("in: cannot read " + in_path);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("in: empty file");
  in.seekg(0);

  const bool is_results = header.rfind("verdict,", 0) == 0;
  const bool is_survey = header.rfind("lo_hex,", 0) == 0;
  if (!is_results && !is_survey)
    throw ConfigError("in: unrecognized CSV header");

  std::vector<ClassifiedSegment> run_rows;
  std::vector<SurveyRecord> survey_rows;
  std::int64_t max_iter = 0;
  if (is_results) {
    run_rows = read_results_csv(in, prec);
    for (const auto& r : run_rows)
      if (r.escape_time > max_iter) max_iter = r.escape_time;
  } else {
    survey_rows = read_survey_csv(in, prec);
    for (const auto& r : survey_rows)
      if (r.first_hit > max_iter) max_iter = r.first_hit;
  }

  // iterate-count curve
  std::vector<std::int64_t> ns;
  const std::int64_t n_top = curve_n_max >= 0 ? curve_n_max : max_iter;
  for (std::int64_t n = 0; n <= n_top; ++n) ns.push_back(n);
  MeasureCurve iter_curve =
      is_results ? measure_at_least_n(run_rows, ns, prec)
                 : measure_at_least_n(survey_rows, ns, prec);
  {
    auto out = open_output(out_dir, "curve_iter.csv");
    write_curve_csv(out, iter_curve);
  }

  // image-width curve
  std::vector<MpFloat> wts;
  if (!width_thresholds.empty()) {
    std::istringstream ss(width_thresholds);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto t = MpFloat::parse(tok, prec, Round::Zero);
      if (!t) throw ConfigError("width-thresholds: bad value '" + tok + "'");
      wts.push_back(std::move(*t));
    }
  } else {
    for (int i = 0; i <= 32; ++i)
      wts.push_back(
          MpFloat::from_double(i * 0.1, prec, Round::Zero));
  }
  MeasureCurve width_curve =
      is_results ? measure_width_at_least(run_rows, wts, prec)
                 : measure_width_at_least(survey_rows, wts, prec);
  {
    auto out = open_output(out_dir, "curve_width.csv");
    write_curve_csv(out, width_curve);
  }

  if (is_results) {
    // histogram span: [smallest escaped width, data extent], both from the
    // file itself
    MpFloat span_hi(prec), span_lo(prec), w(prec);
    bool any = false;
    for (const auto& r : run_rows) {
      if (r.verdict != Verdict::Escaped) continue;
      w.sub(r.segment.hi, r.segment.lo, Round::Down);
      if (!any || w < span_lo) span_lo = w;
      any = true;
    }
    if (any && !run_rows.empty()) {
      MpFloat ext_lo = run_rows.front().segment.lo;
      MpFloat ext_hi = run_rows.front().segment.hi;
      for (const auto& r : run_rows) {
        if (r.segment.lo < ext_lo) ext_lo = r.segment.lo;
        if (r.segment.hi > ext_hi) ext_hi = r.segment.hi;
      }
      span_hi.sub(ext_hi, ext_lo, Round::Up);
      if (span_lo.sign() > 0 && span_lo < span_hi) {
        WidthHistogram h =
            width_slots(run_rows, histogram_slots, span_lo, span_hi);
        auto out = open_output(out_dir, "histogram.csv");
        write_histogram_csv(out, h);
      }
    }
    if (!ranges.empty()) {
      RunResult pseudo;
      pseudo.classified = std::move(run_rows);
      auto summaries = subrange_summary_from_single(
          pseudo, parse_ranges(ranges, prec), prec);
      auto out = open_output(out_dir, "subranges.json");
      write_subranges_json(out, summaries);
    }
  } else if (!ranges.empty()) {
    throw ConfigError("ranges: only meaningful for results CSV input");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"rigorous escape-time computation for the quadratic family "
               "f_a(x) = a - x^2"};
  app.require_subcommand(1);

  CommonOpts escape_opts, survey_opts, study_opts;
  int s_from = 10, s_to = 60, s_step = 1;

  CLI::App* escape =
      app.add_subcommand("escape", "queue-driven escape-time certification");
  add_run_flags(escape, escape_opts);

  CLI::App* survey = app.add_subcommand(
      "survey", "first-encounter survey (no chopping, no requeue)");
  add_run_flags(survey, survey_opts);

  CLI::App* study = app.add_subcommand(
      "bisect-study", "excluded measure and runtime versus bisection steps");
  add_run_flags(study, study_opts);
  study->add_option("--s-from", s_from, "first bisection-step count");
  study->add_option("--s-to", s_to, "last bisection-step count");
  study->add_option("--s-step", s_step, "stride through the s range");

  std::string in_path, report_out = ".", width_thresholds;
  int histogram_slots = 80;
  long report_precision = 250;
  std::int64_t curve_n_max = -1;
  std::vector<std::string> ranges;
  CLI::App* report = app.add_subcommand(
      "report", "aggregate a prior results/survey CSV into curves, "
                "histogram and sub-range summaries");
  report->add_option("--in", in_path, "results or survey CSV")->required();
  report->add_option("--out", report_out, "output directory (default .)");
  report->add_option("--histogram-slots", histogram_slots,
                     "width histogram slot count (default 80)");
  report->add_option("--ranges", ranges,
                     "comma-separated LO:HI sub-ranges for summaries");
  report->add_option("--precision", report_precision,
                     "bits used to parse hex endpoints (default 250)");
  report->add_option("--curve-n-max", curve_n_max,
                     "top iterate threshold (default: data maximum)");
  report->add_option("--width-thresholds", width_thresholds,
                     "comma-separated image-width thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(escape)) {
      apply_config_file(escape, escape_opts);
      return cmd_escape(escape_opts);
    }
    if (app.got_subcommand(survey)) {
      apply_config_file(survey, survey_opts);
      return cmd_survey(survey_opts);
    }
    if (app.got_subcommand(study)) {
      apply_config_file(study, study_opts);
      return cmd_bisect_study(study_opts, s_from, s_to, s_step);
    }
    if (app.got_subcommand(report))
      return cmd_report(in_path, report_out, histogram_slots, ranges,
                        report_precision, curve_n_max, width_thresholds);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace qesc
