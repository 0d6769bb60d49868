#include "fatoulab/expr.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <functional>

namespace fatou {

namespace {

constexpr unsigned kMaxExponent = 4096;

struct Value {
    Poly<G> num, den;
    bool decimal = false;

    static Value constant(const G& c, bool decimal = false) {
        return {Poly<G>::constant(c), Poly<G>::constant(G(1)), decimal};
    }
    bool is_constant() const { return num.degree() <= 0 && den.degree() == 0; }
    G constant_value() const { return num.is_zero() ? G(0) : num[0] / den[0]; }
};

Value reduce(Value v) {
    if (v.num.is_zero()) return {Poly<G>(), Poly<G>::constant(G(1)), v.decimal};
    if (v.den.degree() > 0) {
        const Poly<G> g = gcd(v.num, v.den);
        if (g.degree() > 0) {
            v.num = divmod(v.num, g).first;
            v.den = divmod(v.den, g).first;
        }
    }
    return v;
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    Value parse() {
        skip();
        if (pos_ == s_.size()) throw ParseError(ErrorKind::SyntaxError, pos_, "empty expression");
        Value v = expression();
        skip();
        if (pos_ != s_.size()) throw ParseError(ErrorKind::SyntaxError, pos_, "unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Value expression() {
        Value acc = term();
        for (;;) {
            if (eat('+')) {
                const Value b = term();
                acc = reduce({acc.num * b.den + b.num * acc.den, acc.den * b.den, acc.decimal || b.decimal});
            } else if (eat('-')) {
                const Value b = term();
                acc = reduce({acc.num * b.den - b.num * acc.den, acc.den * b.den, acc.decimal || b.decimal});
            } else {
                return acc;
            }
        }
    }

    Value term() {
        Value acc = unary();
        for (;;) {
            if (eat('*')) {
                const Value b = unary();
                acc = reduce({acc.num * b.num, acc.den * b.den, acc.decimal || b.decimal});
            } else {
                skip();
                const std::size_t at = pos_;
                if (!eat('/')) return acc;
                const Value b = unary();
                if (b.num.is_zero()) throw ParseError(ErrorKind::NotRational, at, "division by zero");
                acc = reduce({acc.num * b.den, acc.den * b.num, acc.decimal || b.decimal});
            }
        }
    }

    Value unary() {
        if (eat('-')) {
            Value v = unary();
            v.num = -v.num;
            return v;
        }
        if (eat('+')) return unary();
        return power();
    }

    Value power() {
        Value base = primary();
        skip();
        const std::size_t at = pos_;
        if (!eat('^')) return base;
        const Value e = unary();
        if (!e.is_constant()) throw ParseError(ErrorKind::NotRational, at, "exponent depends on z");
        const G c = e.constant_value();
        if (!c.is_real() || denominator(c.re()) != 1 || c.re() < 0)
            throw ParseError(ErrorKind::NotRational, at, "exponent " + c.str() + " is not a nonnegative integer");
        if (c.re() > kMaxExponent) throw ParseError(ErrorKind::DegreeCapExceeded, at, "exponent too large");
        const auto k = static_cast<unsigned>(numerator(c.re()).convert_to<long>());
        return reduce({pow(base.num, k), pow(base.den, k), base.decimal || e.decimal});
    }

    Value primary() {
        skip();
        if (pos_ == s_.size()) throw ParseError(ErrorKind::SyntaxError, pos_, "unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            const std::size_t open = pos_++;
            Value v = expression();
            if (!eat(')')) throw ParseError(ErrorKind::SyntaxError, open, "unbalanced parenthesis");
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "z") return {Poly<G>({G(0), G(1)}), Poly<G>::constant(G(1)), false};
            if (name == "i") return Value::constant(G(Rational(0), Rational(1)));
            throw ParseError(ErrorKind::SyntaxError, start, "unknown name '" + name + "'");
        }
        throw ParseError(ErrorKind::SyntaxError, pos_, "unexpected '" + std::string(1, c) + "'");
    }

    Value number() {
        const std::size_t start = pos_;
        bool decimal = false;
        auto digits = [&] {
            const std::size_t from = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return pos_ > from;
        };
        bool any = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            decimal = true;
            any = digits() || any;
        }
        if (!any) throw ParseError(ErrorKind::SyntaxError, start, "malformed number");
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < s_.size() && (s_[look] == '+' || s_[look] == '-')) ++look;
            if (look < s_.size() && std::isdigit(static_cast<unsigned char>(s_[look]))) {
                pos_ = look;
                digits();
                decimal = true;
            }
        }
        const std::string text = s_.substr(start, pos_ - start);
        return Value::constant(G(parse_decimal(text)), decimal);
    }
};

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

G constant_of(const std::string& text, bool& decimal) {
    const RationalExpression e = parse_expression(text);
    if (e.num.degree() > 0 || e.den.degree() > 0)
        throw ParseError(ErrorKind::SyntaxError, 0, "'" + text + "' is not a constant");
    decimal = e.decimal;
    return e.num.is_zero() ? G(0) : e.num[0] / e.den[0];
}

using Formatter = std::function<std::string(const Rational&)>;

std::string format_poly(const Poly<G>& p, const Formatter& fmt) {
    if (p.is_zero()) return "0";
    std::string out;
    for (int k = p.degree(); k >= 0; --k) {
        const G& c = p[k];
        if (c.is_zero()) continue;
        const std::string mono = k == 0 ? "" : (k == 1 ? "z" : "z^" + std::to_string(k));
        bool negative = false;
        std::string text;
        if (c.is_real()) {
            negative = c.re() < 0;
            const Rational mag = negative ? Rational(-c.re()) : c.re();
            if (k > 0 && mag == 1) text = mono;
            else text = fmt(mag) + (k > 0 ? "*" + mono : "");
        } else if (c.re() == 0) {
            negative = c.im() < 0;
            const Rational mag = negative ? Rational(-c.im()) : c.im();
            text = (mag == 1 ? std::string("i") : fmt(mag) + "*i") + (k > 0 ? "*" + mono : "");
        } else {
            std::string inner;
            if (c.re() != 0) inner = fmt(c.re()) + (c.im() < 0 ? " - " : " + ");
            else if (c.im() < 0) inner = "-";
            const Rational im = c.im() < 0 ? Rational(-c.im()) : c.im();
            inner += (im == 1 ? std::string("i") : fmt(im) + "*i");
            text = "(" + inner + ")" + (k > 0 ? "*" + mono : "");
        }
        if (out.empty()) out = negative ? "-" + text : text;
        else out += (negative ? " - " : " + ") + text;
    }
    return out;
}

std::string format_map(const Poly<G>& num, const Poly<G>& den, const Formatter& fmt) {
    const std::string n = format_poly(num, fmt);
    if (den.degree() == 0 && den[0] == G(1)) return n;
    return "(" + n + ")/(" + format_poly(den, fmt) + ")";
}

}  // namespace

RationalExpression parse_expression(const std::string& text) {
    Parser p(text);
    Value v = p.parse();
    // Monic denominator keeps printing canonical.
    const G lead = v.den.leading();
    return {v.num * (G(1) / lead), v.den * (G(1) / lead), v.decimal};
}

MapExpression parse_map(const std::string& text) {
    const RationalExpression e = parse_expression(text);
    MapExpression m;
    m.source = text;
    m.exact = !e.decimal;
    m.map = e.decimal ? RationalMap::exact_coefficients_float_mode(e.num, e.den) : RationalMap::exact(e.num, e.den);
    return m;
}

SpherePoint parse_point(const std::string& text) {
    std::string t = trimmed(text);
    std::string lower = t;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "infinity") return SpherePoint::infinity();
    bool decimal = false;
    const G c = constant_of(t, decimal);
    return decimal ? SpherePoint::affine(c.to_complex()) : SpherePoint::from_exact(c);
}

std::vector<SpherePoint> parse_points(const std::string& text) {
    std::vector<SpherePoint> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = text.find_first_of(",;", start);
        const std::string piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!trimmed(piece).empty()) out.push_back(parse_point(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

RationalQD parse_qd(const std::string& text) {
    const std::string t = trimmed(text);
    if (t.empty() || t.front() != '{') {
        const RationalExpression e = parse_expression(t);
        const RationalQD q = RationalQD::exact(e.num, e.den);
        return e.decimal ? q.to_float() : q;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(ErrorKind::SyntaxError, e.byte, "differential is not valid JSON");
    }
    bool decimal = false;
    auto coefficients = [&](const char* key, bool required) {
        std::vector<G> c;
        if (!j.contains(key)) {
            if (required) throw ParseError(ErrorKind::SyntaxError, 0, std::string("missing \"") + key + "\"");
            return std::vector<G>{G(1)};
        }
        if (!j[key].is_array()) throw ParseError(ErrorKind::SyntaxError, 0, std::string("\"") + key + "\" is not an array");
        for (const auto& e : j[key]) {
            bool d = false;
            if (e.is_string()) c.push_back(constant_of(e.get<std::string>(), d));
            else if (e.is_number()) c.push_back(constant_of(e.dump(), d));
            else throw ParseError(ErrorKind::SyntaxError, 0, "coefficient " + e.dump() + " is not a literal");
            decimal = decimal || d;
        }
        return c;
    };
    const Poly<G> num(coefficients("num", true)), den(coefficients("den", false));
    if (den.is_zero()) throw ParseError(ErrorKind::NotRational, 0, "zero denominator");
    const RationalQD q = RationalQD::exact(num, den);
    return decimal ? q.to_float() : q;
}

std::string print_rational_as_decimal(const Rational& r, bool& terminating) {
    BigInt d = denominator(r);
    int twos = 0, fives = 0;
    while (d % 2 == 0) d /= 2, ++twos;
    while (d % 5 == 0) d /= 5, ++fives;
    terminating = d == 1;
    if (!terminating) return r.str();
    const int places = std::max(twos, fives);
    BigInt scale = 1;
    for (int k = 0; k < places; ++k) scale *= 10;
    BigInt n = numerator(r) * scale / denominator(r);
    const bool negative = n < 0;
    if (negative) n = -n;
    std::string digits = n.str();
    if (places > 0) {
        if (static_cast<int>(digits.size()) <= places)
            digits.insert(0, static_cast<std::size_t>(places + 1) - digits.size(), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    }
    return (negative ? "-" : "") + digits;
}

std::string print_poly(const Poly<G>& p) {
    return format_poly(p, [](const Rational& r) { return r.str(); });
}

std::string print_map(const RationalMap& f) {
    if (!f.has_exact_coefficients()) {
        auto part = [](const Real& x) { return to_decimal(x); };
        auto fmt = [&](const Poly<Complex>& p) {
            std::string out;
            for (int k = p.degree(); k >= 0; --k) {
                if (is_zero(p[k])) continue;
                if (!out.empty()) out += " + ";
                out += "(" + part(p[k].real()) + " + " + part(p[k].imag()) + "*i)";
                if (k > 0) out += "*z^" + std::to_string(k);
            }
            return out.empty() ? std::string("0.0") : out;
        };
        return "(" + fmt(f.num()) + ")/(" + fmt(f.den()) + ")";
    }
    const auto exact_fmt = [](const Rational& r) { return r.str(); };
    if (f.is_exact()) return format_map(f.exact_num(), f.exact_den(), exact_fmt);
    // Float mode needs a decimal literal somewhere to parse back the same way.
    bool all_terminating = true;
    const auto decimal_fmt = [&](const Rational& r) {
        bool t = false;
        std::string s = print_rational_as_decimal(r, t);
        all_terminating = all_terminating && t;
        return s;
    };
    std::string s = format_map(f.exact_num(), f.exact_den(), decimal_fmt);
    if (!all_terminating) s = format_map(f.exact_num(), f.exact_den(), exact_fmt);
    if (!all_terminating || s.find('.') == std::string::npos) s = "1.0*(" + s + ")";
    return s;
}

}  // namespace fatou
