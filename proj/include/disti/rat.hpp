#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace disti {

// Exact arithmetic everywhere: program values are arbitrary-precision
// integers, probabilities are rationals kept in lowest terms with a
// positive denominator (cpp_rational maintains that canonical form).
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

// 2^e as an integer, e >= 0.
Int int_pow2(const Int& e);

// 2^e as a rational, e may be negative.
Rat rat_pow2(const Int& e);

// Shortest form: "0", "3", "1/2".
std::string rat_str(const Rat& r);

// Always "<num>/<den>" (canonical sub-distribution line format).
std::string rat_frac_str(const Rat& r);

// Accepts "<int>" or "<int>/<int>"; throws std::invalid_argument on junk.
Rat parse_rat(const std::string& text);

}  // namespace disti
