#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "qesc/analytics.hpp"
#include "qesc/cli.hpp"
#include "qesc/io.hpp"

using namespace qesc;

namespace {

RunConfig mini_config() {
  RunConfig cfg;
  cfg.u = 40;
  cfg.w = "1e-2";
  cfg.n_max = 60;
  cfg.precision = 128;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("hex round trip is bit-exact") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> val(-1e6, 1e6);
  for (mpfr_prec_t prec : {mpfr_prec_t(53), mpfr_prec_t(250)}) {
    for (int i = 0; i < 2000; ++i) {
      MpFloat x = MpFloat::from_double(val(rng), prec, Round::Nearest);
      // densify the significand
      MpFloat noise =
          MpFloat::from_double(val(rng) * 1e-13, prec, Round::Nearest);
      x.add(x, noise, Round::Nearest);
      auto back = MpFloat::parse(x.to_hex(), prec, Round::Nearest);
      REQUIRE(back);
      REQUIRE(*back == x);
    }
  }
  for (const char* special : {"inf", "-inf"}) {
    MpFloat x = MpFloat::parse(special, 64, Round::Nearest).value();
    CHECK(x.to_hex() == special);
  }
  CHECK(MpFloat::zero(64).to_hex() ==
        MpFloat::parse(MpFloat::zero(64).to_hex(), 64, Round::Nearest)
            ->to_hex());
}

TEST_CASE("directed decimal emission") {
  auto tenth = MpFloat::parse("0.1", 250, Round::Zero).value();
  // the stored value is slightly below one tenth
  CHECK(tenth.to_decimal_fixed(12, Round::Down) == "0.099999999999");
  CHECK(tenth.to_decimal_fixed(12, Round::Up) == "0.100000000000");

  auto exact = MpFloat::parse("0.25", 250, Round::Zero).value();
  CHECK(exact.to_decimal_fixed(12, Round::Down) == "0.250000000000");
  CHECK(exact.to_decimal_fixed(12, Round::Up) == "0.250000000000");
}

TEST_CASE("results CSV round trip") {
  RunConfig cfg = mini_config();
  ResolvedConfig rc = resolve(cfg);
  RunResult res = run_escape(rc);
  std::ostringstream out;
  write_results_csv(out, res);

  std::istringstream in(out.str());
  auto rows = read_results_csv(in, rc.precision);
  REQUIRE(rows.size() == res.classified.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].segment.lo == res.classified[i].segment.lo);
    CHECK(rows[i].segment.hi == res.classified[i].segment.hi);
    CHECK(rows[i].verdict == res.classified[i].verdict);
    CHECK(rows[i].escape_time == res.classified[i].escape_time);
    CHECK(rows[i].hit_iter == res.classified[i].hit_iter);
    CHECK(rows[i].segment.certified_iter ==
          res.classified[i].segment.certified_iter);
  }

  // iterate curve over the file equals the in-process curve bit for bit
  std::vector<std::int64_t> ns{0, 10, 25, 40};
  auto from_mem = measure_at_least_n(res.classified, ns, rc.precision);
  auto from_csv = measure_at_least_n(rows, ns, rc.precision);
  REQUIRE(from_mem.size() == from_csv.size());
  for (std::size_t i = 0; i < from_mem.size(); ++i) {
    CHECK(from_mem[i].count == from_csv[i].count);
    CHECK(from_mem[i].measure.lower == from_csv[i].measure.lower);
    CHECK(from_mem[i].measure.upper == from_csv[i].measure.upper);
  }

  // width thresholds: the decimal round trip only loses tightness, never
  // validity, so the file-based curve is conservative
  std::vector<MpFloat> ts;
  ts.push_back(MpFloat::parse("0.5", rc.precision, Round::Zero).value());
  auto wm = measure_width_at_least(res.classified, ts, rc.precision);
  auto wc = measure_width_at_least(rows, ts, rc.precision);
  CHECK(wc[0].count <= wm[0].count);
  CHECK(wc[0].measure.lower <= wm[0].measure.lower);

  // malformed input diagnostics
  std::istringstream bad_header("nope\n");
  CHECK_THROWS_AS(read_results_csv(bad_header, 64), ParseError);
  std::istringstream bad_row(
      "verdict,lo_hex,hi_hex,width_dec_lower,certifiedIter,escapeTime,"
      "widthAtEscape_dec_lower,hitIter\nESCAPED,zz,0x1p0,0,0,,,\n");
  CHECK_THROWS_AS(read_results_csv(bad_row, 64), ParseError);
}

TEST_CASE("survey CSV round trip") {
  RunConfig cfg = mini_config();
  cfg.u = 30;
  ResolvedConfig rc = resolve(cfg);
  auto records = run_survey(rc);
  std::ostringstream out;
  write_survey_csv(out, records);
  std::istringstream in(out.str());
  auto rows = read_survey_csv(in, rc.precision);
  REQUIRE(rows.size() == records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].segment.lo == records[i].segment.lo);
    CHECK(rows[i].segment.hi == records[i].segment.hi);
    CHECK(rows[i].outcome == records[i].outcome);
    CHECK(rows[i].first_hit == records[i].first_hit);
    CHECK(rows[i].fail_iter == records[i].fail_iter);
  }
}

TEST_CASE("flat config parsing") {
  std::istringstream in(
      "# run shape\n"
      "delta = 1e-4\n"
      "subdiv = 120   # inline comment\n"
      "omega = 1.5 1.75\n"
      "\n"
      "threads=2\n");
  auto kv = parse_flat_config(in);
  CHECK(kv.at("delta") == "1e-4");
  CHECK(kv.at("subdiv") == "120");
  CHECK(kv.at("omega") == "1.5 1.75");
  CHECK(kv.at("threads") == "2");

  std::istringstream bad("delta\n");
  CHECK_THROWS_AS(parse_flat_config(bad), ParseError);
}

TEST_CASE("summary JSON carries the effective configuration") {
  RunConfig cfg = mini_config();
  ResolvedConfig rc = resolve(cfg);
  RunResult res = run_escape(rc);
  std::ostringstream out;
  write_summary_json(out, cfg, rc, res);
  const std::string s = out.str();
  CHECK(s.find("\"delta\": \"1e-3\"") != std::string::npos);
  CHECK(s.find("delta_hex") != std::string::npos);
  CHECK(s.find("\"ESCAPED\"") != std::string::npos);
  CHECK(s.find("lower_rounding") != std::string::npos);
  CHECK(s.find("max_queue_depth") != std::string::npos);
}

TEST_CASE("command line: exit codes and output files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qesc_io_test";
  fs::remove_all(dir);

  // malformed flag value names the flag and exits 2
  {
    const char* argv[] = {"qesc", "escape", "--n0", "abc"};
    CHECK(run_cli(4, argv) == 2);
  }
  // semantic configuration error exits 2
  {
    const char* argv[] = {"qesc", "escape", "--delta", "0"};
    CHECK(run_cli(4, argv) == 2);
  }
  // missing report input exits 2
  {
    const char* argv[] = {"qesc", "report", "--in", "/nonexistent/x.csv"};
    CHECK(run_cli(4, argv) == 2);
  }

  // a tiny run, twice; data files must be byte-identical
  const std::string out1 = (dir / "a").string();
  const std::string out2 = (dir / "b").string();
  auto run_once = [&](const std::string& out_dir) {
    const char* argv[] = {"qesc",        "escape",       "--subdiv", "60",
                          "--min-width-frac", "1e-3",    "--precision", "128",
                          "--out",       out_dir.c_str()};
    return run_cli(10, argv);
  };
  REQUIRE(run_once(out1) == 0);
  REQUIRE(run_once(out2) == 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));

  // config file provides defaults, flags override
  const fs::path cfg_path = dir / "run.cfg";
  {
    std::ofstream cfg_out(cfg_path);
    cfg_out << "subdiv = 40\nmin-width-frac = 1e-2\nnmax = 60\n"
               "precision = 128\ndelta = 1e-2\n";
  }
  const std::string out3 = (dir / "c").string();
  {
    const std::string cfg_arg = cfg_path.string();
    const char* argv[] = {"qesc", "escape", "--config", cfg_arg.c_str(),
                          "--delta", "1e-3", "--out", out3.c_str()};
    REQUIRE(run_cli(8, argv) == 0);
  }
  const std::string summary = slurp(dir / "c" / "summary.json");
  CHECK(summary.find("\"delta\": \"1e-3\"") != std::string::npos);  // flag wins
  CHECK(summary.find("\"u\": 40") != std::string::npos);            // file used

  // report over the produced results
  {
    const std::string in_arg = (dir / "a" / "results.csv").string();
    const std::string rep_dir = (dir / "rep").string();
    const char* argv[] = {"qesc",   "report", "--in",       in_arg.c_str(),
                          "--out",  rep_dir.c_str(), "--precision", "128",
                          "--ranges", "1.4:1.7,1.7:2"};
    REQUIRE(run_cli(10, argv) == 0);
    CHECK(fs::exists(dir / "rep" / "curve_iter.csv"));
    CHECK(fs::exists(dir / "rep" / "curve_width.csv"));
    CHECK(fs::exists(dir / "rep" / "histogram.csv"));
    CHECK(fs::exists(dir / "rep" / "subranges.json"));
    // histogram has the requested row count (default 80)
    std::istringstream hist(slurp(dir / "rep" / "histogram.csv"));
    std::string line;
    int rows = -1;  // header
    while (std::getline(hist, line)) ++rows;
    CHECK(rows == 80);
  }

  fs::remove_all(dir);
}

TEST_SUITE_END();
