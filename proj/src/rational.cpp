#include "wgflow/rational.hpp"

#include "wgflow/errors.hpp"

#include <cctype>
#include <numeric>

namespace wgflow {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw ParameterError("rational arithmetic overflow");
    return static_cast<std::int64_t>(v);
}

Rational reduce(i128 num, i128 den) {
    if (den == 0) throw ParameterError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    return Rational(narrow(num), narrow(den));
}

// Parses an unsigned decimal "123" or "1.25" into num / 10^k.
Rational parse_decimal(const std::string& text, const std::string& whole) {
    if (text.empty()) throw ConfigError("malformed rational '" + whole + "'");
    i128 num = 0;
    i128 den = 1;
    bool seen_point = false;
    bool seen_digit = false;
    for (char ch : text) {
        if (ch == '.') {
            if (seen_point) throw ConfigError("malformed rational '" + whole + "'");
            seen_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(ch))) throw ConfigError("malformed rational '" + whole + "'");
        seen_digit = true;
        num = num * 10 + (ch - '0');
        if (seen_point) den *= 10;
        if (num > INT64_MAX || den > INT64_MAX) throw ConfigError("rational '" + whole + "' out of range");
    }
    if (!seen_digit) throw ConfigError("malformed rational '" + whole + "'");
    return reduce(num, den);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw ParameterError("rational with zero denominator");
    if (num == INT64_MIN || den == INT64_MIN) throw ParameterError("rational arithmetic overflow");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational Rational::parse(const std::string& raw) {
    std::string text;
    for (char ch : raw) {
        if (!std::isspace(static_cast<unsigned char>(ch))) text += ch;
    }
    bool negative = false;
    std::string body = text;
    if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
        negative = body[0] == '-';
        body.erase(0, 1);
    }
    const auto slash = body.find('/');
    Rational r;
    if (slash == std::string::npos) {
        r = parse_decimal(body, raw);
    } else {
        const Rational p = parse_decimal(body.substr(0, slash), raw);
        const Rational q = parse_decimal(body.substr(slash + 1), raw);
        if (q.num() == 0) throw ConfigError("rational '" + raw + "' has a zero denominator");
        r = p / q;
    }
    return negative ? Rational(0) - r : r;
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return reduce(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return reduce(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return reduce(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    return reduce(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
}

bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
}

bool divides_evenly(const Rational& step, const Rational& total) {
    if (step.num() <= 0) return false;
    const Rational q = total / step;
    return q.is_integer() && q.num() > 0;
}

}  // namespace wgflow
