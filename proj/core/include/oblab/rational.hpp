#pragma once

#include <gmpxx.h>

#include <string>

namespace oblab {

// Exact rational scalar backing all symbolic computations.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Parses "a/b" or "a". Throws std::invalid_argument on garbage.
Rational parse_rational(const std::string& s);

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

// Exact conversion: every finite double is a dyadic rational.
inline Rational exact_rational(double x) { return Rational(x); }

}  // namespace oblab
