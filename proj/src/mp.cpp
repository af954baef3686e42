#include "qesc/mp.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>

namespace qesc {

std::optional<MpFloat> MpFloat::parse(std::string_view s, mpfr_prec_t prec,
                                      Round r) {
  // trim
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;

  std::string buf(s);
  if (buf == "inf" || buf == "+inf") return pos_inf(prec);
  if (buf == "-inf") return neg_inf(prec);
  if (buf == "nan") {
    MpFloat x(prec);
    x.set_nan();
    return x;
  }

  MpFloat x(prec);
  char* end = nullptr;
  // base 0: "0x..." parsed as hex (with binary exponent), else decimal
  mpfr_strtofr(x.v_, buf.c_str(), &end, 0, to_mpfr(r));
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return x;
}

std::string MpFloat::to_hex() const {
  if (is_nan()) return "nan";
  if (is_inf()) return sign() > 0 ? "inf" : "-inf";
  char* s = nullptr;
  mpfr_asprintf(&s, "%Ra", v_);
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

std::string MpFloat::to_decimal_fixed(int digits, Round r) const {
  if (is_nan()) return "nan";
  if (is_inf()) return sign() > 0 ? "inf" : "-inf";
  char* s = nullptr;
  mpfr_asprintf(&s, "%.*R*f", digits, to_mpfr(r), v_);
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

std::string MpFloat::to_decimal_sci(int digits, Round r) const {
  if (is_nan()) return "nan";
  if (is_inf()) return sign() > 0 ? "inf" : "-inf";
  char* s = nullptr;
  mpfr_asprintf(&s, "%.*R*e", digits - 1, to_mpfr(r), v_);
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

MpFloat midpoint(const MpFloat& lo, const MpFloat& hi) {
  MpFloat m(lo.precision());
  m.add(lo, hi, Round::Nearest);
  m.mul_2si(m, -1);  // halving is exact in binary
  return m;
}

}  // namespace qesc
