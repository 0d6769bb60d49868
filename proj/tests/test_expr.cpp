#include <doctest.h>

#include <random>

#include "fatoulab/expr.hpp"
#include "helpers.hpp"

using namespace fatou;
using namespace testing_helpers;

namespace {

ErrorKind kind_of(const std::string& s) {
    try {
        parse_map(s);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error for " << s);
    return ErrorKind::Usage;
}

std::size_t position_of(const std::string& s) {
    try {
        parse_map(s);
    } catch (const ParseError& e) {
        return e.position();
    }
    FAIL("no parse error for " << s);
    return 0;
}

// Random expression over the grammar, built from small pieces.
std::string random_expression(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 9), small(1, 5);
    auto literal = [&] {
        switch (pick(rng) % 5) {
        case 0: return std::to_string(small(rng));
        case 1: return std::to_string(small(rng)) + "/" + std::to_string(small(rng) + 1);
        case 2: return std::string("i");
        case 3: return std::to_string(small(rng)) + "*i";
        default: return std::string("z");
        }
    };
    if (depth == 0) return literal();
    const std::string a = random_expression(rng, depth - 1), b = random_expression(rng, depth - 1);
    switch (pick(rng)) {
    case 0: return "(" + a + ")^" + std::to_string(small(rng) % 3 + 1);
    case 1: return "-(" + a + ")";
    case 2: return "(" + a + ")/(" + b + " + 7)";
    case 3:
    case 4: return a + " - " + b;
    case 5:
    case 6: return "(" + a + ")*(" + b + ")";
    default: return a + " + " + b;
    }
}

}  // namespace

TEST_CASE("parse_map") {
    SUBCASE("z^2 + 1/4") {
        const auto m = parse_map("z^2 + 1/4");
        CHECK(m.exact);
        CHECK(m.map.degree() == 2);
        CHECK(m.map.exact_num() == poly({q(1, 4), G(0), G(1)}));
        CHECK(m.map.exact_den() == poly({G(1)}));
    }
    SUBCASE("degree-4 quotient") {
        const auto m = parse_map("(z^2+1)^2/(4*z*(z^2-1))");
        CHECK(m.exact);
        CHECK(m.map.degree() == 4);
        const auto direct = RationalMap::exact(poly({G(1), G(0), G(2), G(0), G(1)}), poly({G(0), q(-4), G(0), q(4)}));
        CHECK(m.map == direct);
    }
    SUBCASE("decimal literal selects float mode") {
        const auto m = parse_map("z^2 + 0.1");
        CHECK_FALSE(m.exact);
        CHECK_FALSE(m.map.is_exact());
        CHECK(abs(m.map.num()[0] - cx(0.1)) < Real(1e-17));
    }
    SUBCASE("precedence") {
        CHECK(parse_map("-z^2").map.exact_num() == poly({G(0), G(0), q(-1)}));
        CHECK(parse_map("2*z^2^1 - z").map == parse_map("2*z*z - z").map);
        CHECK(parse_map("1/2*i + z^2").map.exact_num() == poly({G(Rational(0), Rational(1, 2)), G(0), G(1)}));
        CHECK(parse_map("z^(1+1)").map == parse_map("z^2").map);
        CHECK(parse_map("(z - 1)/(z + 1) * z").map.degree() == 2);
    }
    SUBCASE("common factors cancel") { CHECK(parse_map("(z^3 - z)/(z - 1)").map == parse_map("z^2 + z").map); }
    SUBCASE("errors") {
        CHECK(kind_of("z^z") == ErrorKind::NotRational);
        CHECK(kind_of("z^(1/2)") == ErrorKind::NotRational);
        CHECK(kind_of("z^-1") == ErrorKind::NotRational);
        CHECK(kind_of("z/0") == ErrorKind::NotRational);
        CHECK(kind_of("z + ") == ErrorKind::SyntaxError);
        CHECK(kind_of("(z + 1") == ErrorKind::SyntaxError);
        CHECK(kind_of("2z") == ErrorKind::SyntaxError);
        CHECK(kind_of("x^2") == ErrorKind::SyntaxError);
        CHECK(kind_of("") == ErrorKind::SyntaxError);
        CHECK(kind_of("3/4") == ErrorKind::DegreeTooSmall);
        CHECK(kind_of("z*(z+1)/(z+1)/z") == ErrorKind::DegreeTooSmall);
        CHECK(position_of("z^2 + $") == 6);
        CHECK(position_of("z + x") == 4);
        CHECK(position_of("z^z") == 1);
        CHECK(position_of("(z + 1") == 0);
    }
}

TEST_CASE("points and differentials") {
    CHECK(parse_point("inf").is_infinity());
    CHECK(parse_point(" Infinity ").is_infinity());
    CHECK(*parse_point("1/2").exact == q(1, 2));
    CHECK(*parse_point("-1/2 + 3/4*i").exact == G(Rational(-1, 2), Rational(3, 4)));
    CHECK_FALSE(parse_point("0.5").is_exact());
    CHECK_THROWS_AS(parse_point("z"), Error);
    const auto pts = parse_points("0, 1, -1; inf");
    REQUIRE(pts.size() == 4);
    CHECK(pts[3].is_infinity());

    const auto a = parse_qd(R"({"num": ["1"], "den": [0, "-1", 0, 1]})");
    CHECK(a.is_exact());
    CHECK(a.exact_den() == poly({G(0), q(-1), G(0), G(1)}));
    const auto b = parse_qd("1/(z^3 - z)");
    CHECK(b.exact_num() == a.exact_num());
    CHECK(b.exact_den() == a.exact_den());
    CHECK(parse_qd(R"({"num": ["1/2 + i"]})").exact_num() == poly({G(Rational(1, 2), Rational(1))}));
    CHECK_FALSE(parse_qd(R"({"num": [0.25], "den": [1, 1]})").is_exact());
    CHECK_THROWS_AS(parse_qd(R"({"den": [1]})"), Error);
    CHECK_THROWS_AS(parse_qd(R"({"num": [1], )"), Error);
}

TEST_CASE("printing round-trips") {
    std::vector<std::string> corpus{"z^2 + 1/4",
                                    "z^2 + i",
                                    "z^2 - 1",
                                    "z^2 + 0.1",
                                    "-z + z^2",
                                    "(z^2+1)^2/(4*z*(z^2-1))",
                                    "z^2 + 1.0",
                                    "0.3*z^3 + z/3",
                                    "(1/2 + 3/4*i)*z^3 - i*z + 5",
                                    "1/(z^2 + 2*i)",
                                    "(z - 2.5)^2/(z + 0.125)",
                                    "z^3 - 3/4*z"};
    std::mt19937 rng(7);
    while (corpus.size() < 50) {
        const std::string e = random_expression(rng, 3);
        try {
            if (parse_map(e).map.degree() >= 1) corpus.push_back(e);
        } catch (const Error&) {
        }
    }
    for (const auto& s : corpus) {
        CAPTURE(s);
        const auto m = parse_map(s);
        const std::string printed = print_map(m.map);
        CAPTURE(printed);
        const auto again = parse_map(printed);
        CHECK(again.map == m.map);
        CHECK(again.exact == m.exact);
        CHECK(print_map(again.map) == printed);
    }
    CHECK(print_map(parse_map("z^2+1/4").map) == "z^2 + 1/4");
    CHECK(print_map(parse_map("z^2+0.1").map) == "z^2 + 0.1");
    CHECK(print_map(parse_map("z^2+1.0").map) == "1.0*(z^2 + 1)");
    bool t = false;
    CHECK(print_rational_as_decimal(Rational(-3, 8), t) == "-0.375");
    CHECK(t);
    CHECK(print_rational_as_decimal(Rational(1, 3), t) == "1/3");
    CHECK_FALSE(t);
}
