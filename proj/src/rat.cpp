#include "disti/rat.hpp"

namespace disti {

Int int_pow2(const Int& e) {
  if (e < 0) throw std::invalid_argument("int_pow2: negative exponent");
  if (e > 1u << 20) throw std::invalid_argument("int_pow2: exponent too large");
  return Int(1) << static_cast<unsigned>(e);
}

Rat rat_pow2(const Int& e) {
  if (e >= 0) return Rat(int_pow2(e));
  return Rat(Int(1), int_pow2(-e));
}

std::string rat_str(const Rat& r) {
  if (rat_den(r) == 1) return rat_num(r).str();
  return rat_num(r).str() + "/" + rat_den(r).str();
}

std::string rat_frac_str(const Rat& r) {
  return rat_num(r).str() + "/" + rat_den(r).str();
}

Rat parse_rat(const std::string& text) {
  auto is_int = [](const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  };
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    if (!is_int(text)) throw std::invalid_argument("not a rational: '" + text + "'");
    return Rat(Int(text));
  }
  std::string num = text.substr(0, slash), den = text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) throw std::invalid_argument("not a rational: '" + text + "'");
  Int d(den);
  if (d == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
  return Rat(Int(num), d);
}

}  // namespace disti
