#include <doctest.h>

#include <random>
#include <sstream>

#include "oracle.hpp"
#include "qesc/orbit.hpp"

using namespace qesc;
using qesc::test::encloses;
using qesc::test::Rat;
using qesc::test::RatInterval;

namespace {

constexpr mpfr_prec_t kPrec = 128;

MpFloat mps(const char* s, mpfr_prec_t prec = kPrec) {
  return MpFloat::parse(s, prec, Round::Zero).value();
}

MpFloat default_loss(mpfr_prec_t prec = kPrec) {
  // delta/10 for delta = 1e-3
  return mps("1e-4", prec);
}

// exact orbit of a rational parameter: c_0 = a, c_{n+1} = a - c_n^2
struct RatOrbit {
  Rat a, c, d;
  explicit RatOrbit(Rat a_) : a(a_), c(a_), d(1) {}
  void step() {
    d = Rat(1) - Rat(2) * c * d;
    c = a - c.sqr();
  }
};

}  // namespace

TEST_SUITE_BEGIN("orbit");

TEST_CASE("initial state is the identity on the segment") {
  ParamSegment seg(mps("1.4"), mps("2"));
  Orbit o(seg, default_loss());
  CHECK(o.n() == 0);
  CHECK(o.orientation() == +1);
  CHECK(o.hull().lo() == seg.lo);
  CHECK(o.hull().hi() == seg.hi);
  CHECK(o.derivative_enclosure().lo() == MpFloat::from_int(1, kPrec));
  CHECK(o.derivative_enclosure().is_thin());
  // width of the hull equals the segment width exactly at n = 0
  auto wb = o.monotone_width();
  auto sw = seg.width();
  CHECK(wb.lower == sw.lower);
  CHECK(wb.upper == sw.upper);
}

TEST_CASE("a = 2: exact fixed point of the critical orbit") {
  Orbit o(MpFloat::from_int(2, kPrec), default_loss());
  const MpFloat minus_two = MpFloat::from_int(-2, kPrec);

  REQUIRE(o.step() == StepStatus::Ok);
  CHECK(o.hull().is_thin());
  CHECK(o.hull().lo() == minus_two);
  CHECK(o.derivative_enclosure().is_thin());
  CHECK(o.derivative_enclosure().lo() == MpFloat::from_int(-3, kPrec));

  REQUIRE(o.step() == StepStatus::Ok);
  CHECK(o.hull().lo() == minus_two);
  CHECK(o.derivative_enclosure().lo() == MpFloat::from_int(-11, kPrec));

  for (int n = 2; n < 1000; ++n) {
    REQUIRE(o.step() == StepStatus::Ok);
    CHECK(o.hull().is_thin());
    CHECK(o.hull().lo() == minus_two);
    CHECK(o.derivative_enclosure().hi().sign() < 0);
  }
}

TEST_CASE("[1.9, 2]: first step against the exact rational orbit") {
  ParamSegment seg(mps("1.9"), mps("2"));
  Orbit o(seg, default_loss());
  REQUIRE(o.step() == StepStatus::Ok);

  CHECK(o.orientation() == -1);

  // derivative: exact values 1 - 2a at both endpoints lie inside
  const Rat a_lo = Rat::from(seg.lo), a_hi = Rat::from(seg.hi);
  CHECK(encloses(o.derivative_enclosure(), Rat(1) - Rat(2) * a_lo));
  CHECK(encloses(o.derivative_enclosure(), Rat(1) - Rat(2) * a_hi));
  // and the enclosure is tight: within the exact range plus slack
  RatInterval d_exact{Rat(1) - Rat(2) * a_hi, Rat(1) - Rat(2) * a_lo};
  const Rat slack(1, 1L << 40);
  CHECK((d_exact.lo - slack).cmp_against(o.derivative_enclosure().lo()) >= 0);
  CHECK((d_exact.hi + slack).cmp_against(o.derivative_enclosure().hi()) <= 0);

  // hull encloses [c_1(2), c_1(1.9)] = [-2, 1.9 - 1.9^2]
  CHECK(encloses(o.hull(), a_hi - a_hi.sqr()));
  CHECK(encloses(o.hull(), a_lo - a_lo.sqr()));

  // monotone width straddles the exact width
  RatOrbit lo_orbit(a_lo), hi_orbit(a_hi);
  lo_orbit.step();
  hi_orbit.step();
  const Rat exact_width = (lo_orbit.c - hi_orbit.c).abs();
  auto mw = o.monotone_width();
  CHECK(exact_width.cmp_against(mw.lower) <= 0);
  CHECK(exact_width.cmp_against(mw.upper) >= 0);
}

TEST_CASE("omega = [1.4, 2]: two steps, then the first hit") {
  ParamSegment seg(mps("1.4"), mps("2"));
  CriticalNbhd nbhd(mps("1e-3"));
  Orbit o(seg, default_loss());

  CHECK(o.delta_hit(nbhd) == DeltaHit::Disjoint);

  REQUIRE(o.step() == StepStatus::Ok);
  CHECK(o.delta_hit(nbhd) == DeltaHit::Disjoint);
  // dEnc within [-3, -1.8] plus rounding slack, hull covers [-2, -0.56]
  const Rat slack(1, 1L << 40);
  CHECK((Rat(-3) - slack).cmp_against(o.derivative_enclosure().lo()) >= 0);
  CHECK((Rat(-18, 10) + slack).cmp_against(o.derivative_enclosure().hi()) <=
        0);
  CHECK(encloses(o.hull(), Rat(-2)));
  CHECK(encloses(o.hull(), Rat::from(seg.lo) - Rat::from(seg.lo).sqr()));

  REQUIRE(o.step() == StepStatus::Ok);
  CHECK(o.n() == 2);
  // c_2(1.4) = 1.4 - 0.56^2 with the stored 1.4
  RatOrbit lo_orbit(Rat::from(seg.lo));
  lo_orbit.step();
  lo_orbit.step();
  CHECK(encloses(o.hull(), lo_orbit.c));
  CHECK(encloses(o.hull(), Rat(-2)));
  CHECK((Rat(-11) - slack).cmp_against(o.derivative_enclosure().lo()) >= 0);

  // the hull reaches into the critical neighbourhood at n = 2
  CHECK(o.delta_hit(nbhd) == DeltaHit::Hit);

  // exact image width at n = 2 is about 3.0864
  RatOrbit hi_orbit(Rat(2));
  hi_orbit.step();
  hi_orbit.step();
  const Rat exact_width = (lo_orbit.c - hi_orbit.c).abs();
  auto mw = o.monotone_width();
  CHECK(exact_width.cmp_against(mw.lower) <= 0);
  CHECK(exact_width.cmp_against(mw.upper) >= 0);
}

TEST_CASE("disjointness test honours the open neighbourhood") {
  CriticalNbhd nbhd(mps("1e-3"));
  auto iv = [&](const char* lo, const char* hi) {
    return MpInterval::make(mps(lo), mps(hi));
  };
  // boundary touch counts as disjoint
  CHECK(nbhd.provably_disjoint(iv("1e-3", "0.2")));
  CHECK(nbhd.provably_disjoint(iv("-0.2", "-1e-3")));
  CHECK_FALSE(nbhd.provably_disjoint(iv("5e-4", "0.2")));
  CHECK_FALSE(nbhd.provably_disjoint(iv("-0.2", "-5e-4")));
  CHECK_FALSE(nbhd.provably_disjoint(iv("-1e-5", "1e-5")));
}

TEST_CASE("escape test: iterate count and width gates") {
  ParamSegment seg(mps("1.4"), mps("2"));
  Orbit o(seg, default_loss());
  REQUIRE(o.step() == StepStatus::Ok);
  REQUIRE(o.step() == StepStatus::Ok);
  CriticalNbhd small(mps("1e-3"));
  CHECK(o.escape_check(small, 2));        // width ~3.09 >= sqrt(1e-3), n = 2
  CHECK_FALSE(o.escape_check(small, 3));  // iterate count gate
  CriticalNbhd huge(mps("16"));           // sqrt = 4 > width: width gate
  CHECK_FALSE(o.escape_check(huge, 2));
}

TEST_CASE("monotone-image tightness") {
  // hull width upper minus monotone lower is at most the two endpoint
  // enclosure widths (up to fold rounding)
  ParamSegment seg(mps("1.41"), mps("1.4101"));
  Orbit o(seg, default_loss());
  int certified = 0;
  for (int n = 0; n < 12; ++n) {
    if (o.step() != StepStatus::Ok) break;
    ++certified;
    auto mw = o.monotone_width();
    Rat lhs = Rat::from(width_bounds(o.hull()).upper) - Rat::from(mw.lower);
    Rat rhs = Rat::from(width_bounds(o.endpoint_lo_enclosure()).upper) +
              Rat::from(width_bounds(o.endpoint_hi_enclosure()).upper);
    const Rat slack(1, 1L << 60);
    CHECK(lhs <= rhs + slack);
  }
  CHECK(certified >= 8);
}

TEST_CASE("containment fuzz: sampled parameter orbits stay enclosed") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  const mpfr_prec_t guard = kPrec + 60;
  int segments_done = 0;
  while (segments_done < 20) {
    const double base = 1.4 + 0.6 * pos(rng);
    const double width = 1e-4 + 1e-3 * pos(rng);
    if (base + width > 2.0) continue;
    ++segments_done;
    ParamSegment seg(MpFloat::from_double(base, kPrec, Round::Nearest),
                     MpFloat::from_double(base + width, kPrec, Round::Nearest));
    Orbit o(seg, default_loss());
    std::vector<MpInterval> hulls, e_los, e_his;
    std::vector<int> orients;
    for (int n = 0; n < 20; ++n) {
      if (o.step() != StepStatus::Ok) break;
      hulls.push_back(o.hull());
      e_los.push_back(o.endpoint_lo_enclosure());
      e_his.push_back(o.endpoint_hi_enclosure());
      orients.push_back(o.orientation());
    }
    if (hulls.empty()) continue;
    MpFloat a(guard), x(guard), t(guard);
    for (int s = 0; s < 1000; ++s) {
      const double frac = pos(rng);
      t.sub(seg.hi, seg.lo, Round::Nearest);
      t.mul(t, MpFloat::from_double(frac, guard, Round::Nearest),
            Round::Nearest);
      a.add(seg.lo, t, Round::Nearest);
      if (!(seg.lo <= a && a <= seg.hi)) continue;
      x.set(a, Round::Nearest);
      for (std::size_t n = 0; n < hulls.size(); ++n) {
        t.sqr(x, Round::Nearest);
        x.sub(a, t, Round::Nearest);  // simulated, not rigorous
        CHECK(hulls[n].lo() <= x);
        CHECK(x <= hulls[n].hi());
        if (orients[n] > 0) {
          CHECK(e_los[n].lo() <= x);
          CHECK(x <= e_his[n].hi());
        } else {
          CHECK(e_his[n].lo() <= x);
          CHECK(x <= e_los[n].hi());
        }
      }
    }
  }
}

TEST_CASE("derivative enclosure vs high-precision central differences") {
  // (c_n(a+h) - c_n(a-h)) / 2h = c_n'(a) + c_n'''(xi) h^2 / 6; the third
  // derivative is bounded with an interval recursion over the certified
  // hulls, so the inflation is rigorous
  const mpfr_prec_t guard = kPrec + 120;
  const char* segs[][2] = {{"1.45", "1.4501"},
                           {"1.62", "1.6201"},
                           {"1.79", "1.7901"},
                           {"1.93", "1.9301"},
                           {"1.9995", "2"}};
  for (const auto& sp : segs) {
    ParamSegment seg(mps(sp[0]), mps(sp[1]));
    Orbit o(seg, default_loss());

    MpInterval d = MpInterval::thin(MpFloat::from_int(1, kPrec));
    MpInterval s2 = MpInterval::thin(MpFloat::zero(kPrec));
    MpInterval s3 = MpInterval::thin(MpFloat::zero(kPrec));
    const MpInterval neg_one = MpInterval::thin(MpFloat::from_int(-1, kPrec));
    const MpInterval three = MpInterval::thin(MpFloat::from_int(3, kPrec));

    MpFloat h(guard), t(guard);
    t.sub(seg.hi, seg.lo, Round::Nearest);
    h.mul(t, MpFloat::parse("1e-6", guard, Round::Nearest).value(),
          Round::Nearest);

    for (int n = 1; n <= 20; ++n) {
      // derivative triple advanced with the hull at n-1:
      // d' = 1 - 2 c d ; s2' = -2 (d^2 + c s2) ; s3' = -2 (3 d s2 + c s3)
      const MpInterval& hull = o.hull();
      MpInterval two_hull(kPrec);
      two_hull.assign(hull);
      two_hull.scale2();
      MpInterval d_next(kPrec), s2_next(kPrec), s3_next(kPrec), tmp(kPrec),
          tmp2(kPrec);
      MpInterval::mul(tmp, two_hull, d);
      MpInterval::one_minus(d_next, tmp);

      MpInterval::sqr(tmp, d);
      MpInterval::mul(tmp2, hull, s2);
      MpInterval::add(s2_next, tmp, tmp2);
      s2_next.scale2();
      MpInterval::mul(tmp, s2_next, neg_one);
      s2_next.assign(tmp);

      MpInterval::mul(tmp, d, s2);
      MpInterval::mul(tmp2, tmp, three);
      MpInterval::mul(tmp, hull, s3);
      MpInterval::add(s3_next, tmp2, tmp);
      s3_next.scale2();
      MpInterval::mul(tmp, s3_next, neg_one);
      s3_next.assign(tmp);

      if (o.step() != StepStatus::Ok) break;
      d.assign(d_next);
      s2.assign(s2_next);
      s3.assign(s3_next);

      // |c_n'''| bound over the segment
      MpFloat mag3(kPrec);
      mag3.neg(s3.lo());
      if (s3.hi() > mag3) mag3 = s3.hi();
      if (mag3.sign() < 0) mag3.set_zero();

      MpFloat trunc(guard);
      trunc.sqr(h, Round::Up);
      trunc.mul(trunc, mag3, Round::Up);
      trunc.div_ui(trunc, 6, Round::Up);
      MpFloat slack(guard);
      slack.set_d(1.0, Round::Nearest);
      slack.mul_2si(slack, -static_cast<long>(kPrec + 40));
      trunc.add(trunc, slack, Round::Up);

      for (int pt = 1; pt <= 5; ++pt) {
        MpFloat a(guard);
        t.sub(seg.hi, seg.lo, Round::Nearest);
        t.mul_si(t, pt, Round::Nearest);
        t.div_ui(t, 6, Round::Nearest);
        a.add(seg.lo, t, Round::Nearest);

        auto point_orbit = [&](const MpFloat& param) {
          MpFloat x(guard), w(guard);
          x.set(param, Round::Nearest);
          for (int i = 0; i < n; ++i) {
            w.sqr(x, Round::Nearest);
            x.sub(param, w, Round::Nearest);
          }
          return x;
        };
        MpFloat a_plus(guard), a_minus(guard);
        a_plus.add(a, h, Round::Nearest);
        a_minus.sub(a, h, Round::Nearest);
        MpFloat fd(guard);
        fd.sub(point_orbit(a_plus), point_orbit(a_minus), Round::Nearest);
        fd.div(fd, h, Round::Nearest);
        fd.mul_2si(fd, -1);

        MpFloat lo_infl(guard), hi_infl(guard);
        lo_infl.sub(o.derivative_enclosure().lo(), trunc, Round::Down);
        hi_infl.add(o.derivative_enclosure().hi(), trunc, Round::Up);
        CHECK(lo_infl <= fd);
        CHECK(fd <= hi_infl);
      }
    }
  }
}

TEST_CASE("monotonicity failure is reported, state is preserved") {
  // c_1' = 1 - 2a straddles zero on [0.4, 0.6]
  ParamSegment seg(mps("0.4"), mps("0.6"));
  Orbit o(seg, default_loss());
  CHECK(o.step() == StepStatus::MonotonicityFailure);
  CHECK(o.n() == 0);
  CHECK(o.failed_iter() == 1);
  CHECK(o.hull().lo() == seg.lo);  // untouched
}

TEST_CASE("precision loss fires on the enclosure width cutoff") {
  // 1.5001 uses all 128 bits, so its square rounds at the first step and
  // the zero-tolerance cutoff fires immediately
  ParamSegment seg(mps("1.5"), mps("1.5001"));
  Orbit o(seg, MpFloat::zero(kPrec));
  CHECK(o.step() == StepStatus::PrecisionLoss);
  CHECK(o.n() == 0);
  CHECK(o.hull().hi() == seg.hi);
}

TEST_CASE("steps are deterministic") {
  ParamSegment seg(mps("1.76"), mps("1.77"));
  Orbit a(seg, default_loss()), b(seg, default_loss());
  for (int i = 0; i < 50; ++i) {
    auto ra = a.step();
    auto rb = b.step();
    REQUIRE(ra == rb);
    if (ra != StepStatus::Ok) break;
    CHECK(a.hull().lo().to_hex() == b.hull().lo().to_hex());
    CHECK(a.hull().hi().to_hex() == b.hull().hi().to_hex());
    CHECK(a.derivative_enclosure().lo().to_hex() ==
          b.derivative_enclosure().lo().to_hex());
  }
}

TEST_CASE("orbit trajectory dump") {
  ParamSegment seg(mps("1.9"), mps("2"));
  std::ostringstream out;
  auto st = dump_orbit_csv(seg, default_loss(), 3, out);
  CHECK(st == StepStatus::Ok);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "n,eLo_lo,eLo_hi,eHi_lo,eHi_hi,d_lo,d_hi,hull_lo,hull_hi");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find("0x") != std::string::npos);
  }
  CHECK(rows == 4);

  // a wide segment folds by iterate 4: the dump stops at the failure
  std::ostringstream out2;
  CHECK(dump_orbit_csv(seg, default_loss(), 10, out2) ==
        StepStatus::MonotonicityFailure);
}

TEST_SUITE_END();
