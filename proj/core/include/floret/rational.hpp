#pragma once

// Exact rational arithmetic helpers used for structural decisions (row-space
// membership) and for reporting closed-form estimates without rounding.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Dense>

namespace floret {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using RationalMatrix = std::vector<std::vector<Rational>>;

RationalMatrix to_rational(const Eigen::MatrixXi& m);

// Rank by Gauss-Jordan elimination over the rationals. The argument is taken
// by value and reduced in place.
std::size_t rational_rank(RationalMatrix rows);

// True iff `target` is a rational linear combination of `rows`.
bool in_row_space(const RationalMatrix& rows, const std::vector<Rational>& target);

double to_double(const Rational& r);
// "n/d", or "n" when the denominator is 1.
std::string to_string(const Rational& r);
// Parses "n/d" or "n". Throws std::invalid_argument on malformed input.
Rational parse_rational(const std::string& text);

}  // namespace floret
