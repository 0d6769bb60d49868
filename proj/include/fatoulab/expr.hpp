#pragma once

#include <string>
#include <vector>

#include "fatoulab/qd.hpp"

namespace fatou {

/// SyntaxError or NotRational with the offending offset into the source text.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, std::size_t position, const std::string& what)
        : Error(kind, "at position " + std::to_string(position) + ": " + what), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Rational function in z built from integer, rational and decimal literals.
struct RationalExpression {
    Poly<G> num, den;
    bool decimal = false;  // some literal was a decimal
};

/// Grammar: z, i, integers, decimals, + - * / ^ and parentheses; ^ takes a
/// constant nonnegative integer exponent.
RationalExpression parse_expression(const std::string& text);

struct MapExpression {
    std::string source;
    RationalMap map;
    bool exact = false;
};

/// Exact mode unless a decimal literal appears; throws DegreeTooSmall for constants.
MapExpression parse_map(const std::string& text);

/// A constant, or "inf" / "infinity".
SpherePoint parse_point(const std::string& text);
/// Comma-separated points.
std::vector<SpherePoint> parse_points(const std::string& text);

/// JSON {"num": [...], "den": [...]} with ascending coefficients written as
/// literals or numbers, or an expression in z for R in R dz^2.
RationalQD parse_qd(const std::string& text);

/// Expression that parses back to the same map in the same mode.
std::string print_map(const RationalMap& f);
std::string print_poly(const Poly<G>& p);
/// Terminating decimal when the denominator is 2^a 5^b, otherwise a/b.
std::string print_rational_as_decimal(const Rational& r, bool& terminating);

}  // namespace fatou
