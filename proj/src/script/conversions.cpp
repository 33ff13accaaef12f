#include "pinauthor/script/conversions.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace pinauthor::script {

namespace {

struct Decimal {
    std::string digits; // no leading zeros unless the value is zero
    int exponent = 0;   // value = 0.d1d2d3... * 10^(exponent + 1)
};

Decimal shortestDecimal(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific);
    std::string_view s(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
    auto e = s.find('e');
    Decimal d;
    for (char c : s.substr(0, e)) {
        if (c != '.') d.digits += c;
    }
    std::from_chars(s.data() + e + 1 + (s[e + 1] == '+' ? 1 : 0), s.data() + s.size(), d.exponent);
    while (d.digits.size() > 1 && d.digits.back() == '0') d.digits.pop_back();
    return d;
}

// Exact decimal expansion of |v|; digits carry every significant digit.
Decimal exactDecimal(double v) {
    std::vector<char> buf(1200);
    int n = std::snprintf(buf.data(), buf.size(), "%.1100e", std::fabs(v));
    std::string_view s(buf.data(), static_cast<std::size_t>(n));
    auto e = s.find('e');
    Decimal d;
    for (char c : s.substr(0, e)) {
        if (c != '.') d.digits += c;
    }
    std::from_chars(s.data() + e + 1 + (s[e + 1] == '+' ? 1 : 0), s.data() + s.size(), d.exponent);
    return d;
}

// Keep `count` leading digits, rounding half up on the exact expansion.
Decimal roundDigits(Decimal d, int count) {
    if (count <= 0) {
        // Only the rounding decision from the first digit remains.
        bool up = count == 0 && !d.digits.empty() && d.digits[0] >= '5';
        Decimal r;
        r.digits = up ? "1" : "0";
        r.exponent = up ? d.exponent + 1 : d.exponent;
        return r;
    }
    if (static_cast<int>(d.digits.size()) <= count) {
        d.digits.append(static_cast<std::size_t>(count) - d.digits.size(), '0');
        return d;
    }
    bool up = d.digits[static_cast<std::size_t>(count)] >= '5';
    d.digits.resize(static_cast<std::size_t>(count));
    if (up) {
        int i = count - 1;
        while (i >= 0 && d.digits[static_cast<std::size_t>(i)] == '9') {
            d.digits[static_cast<std::size_t>(i)] = '0';
            --i;
        }
        if (i < 0) {
            d.digits.insert(d.digits.begin(), '1');
            d.digits.pop_back();
            ++d.exponent;
        } else {
            ++d.digits[static_cast<std::size_t>(i)];
        }
    }
    return d;
}

std::string exponentSuffix(int e) {
    return std::string("e") + (e >= 0 ? "+" : "-") + std::to_string(std::abs(e));
}

bool isJsSpace(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

int digitValue(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return c - 'a' + 10;
    if (c >= 'A' && c <= 'Z') return c - 'A' + 10;
    return 99;
}

// Length of the longest StrDecimalLiteral prefix (without sign).
std::size_t decimalPrefix(std::string_view s) {
    std::size_t i = 0;
    std::size_t intDigits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        ++i;
        ++intDigits;
    }
    std::size_t fracDigits = 0;
    if (i < s.size() && s[i] == '.') {
        std::size_t j = i + 1;
        while (j < s.size() && s[j] >= '0' && s[j] <= '9') {
            ++j;
            ++fracDigits;
        }
        if (intDigits + fracDigits == 0) return 0;
        i = j;
    }
    if (intDigits + fracDigits == 0) return 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        std::size_t expStart = j;
        while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
        if (j > expStart) i = j;
    }
    return i;
}

double parseDecimal(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
    if (res.ec == std::errc::result_out_of_range) {
        // from_chars leaves v untouched on overflow/underflow
        bool tiny = false;
        auto e = s.find_first_of("eE");
        if (e != std::string_view::npos && e + 1 < s.size() && s[e + 1] == '-') tiny = true;
        return tiny ? 0.0 : HUGE_VAL;
    }
    return v;
}

} // namespace

std::string_view trimWhitespace(std::string_view text) {
    auto isSpaceAt = [&](std::size_t i, bool forward) -> std::size_t {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (isJsSpace(c)) return 1;
        if (forward) {
            if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) return 2;
            if (c == 0xEF && text.substr(i, 3) == "\xEF\xBB\xBF") return 3;
        }
        return 0;
    };
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t n = isSpaceAt(start, true);
        if (!n) break;
        start += n;
    }
    std::size_t end = text.size();
    while (end > start) {
        if (isJsSpace(static_cast<unsigned char>(text[end - 1]))) {
            --end;
        } else if (end - start >= 2 && static_cast<unsigned char>(text[end - 2]) == 0xC2 &&
                   static_cast<unsigned char>(text[end - 1]) == 0xA0) {
            end -= 2;
        } else {
            break;
        }
    }
    return text.substr(start, end - start);
}

std::string numberToString(double v) {
    if (std::isnan(v)) return "NaN";
    if (v == 0.0) return "0";
    if (std::isinf(v)) return v < 0 ? "-Infinity" : "Infinity";
    std::string sign = v < 0 ? "-" : "";
    Decimal d = shortestDecimal(std::fabs(v));
    int k = static_cast<int>(d.digits.size());
    int n = d.exponent + 1;
    if (k <= n && n <= 21) return sign + d.digits + std::string(static_cast<std::size_t>(n - k), '0');
    if (0 < n && n <= 21) {
        return sign + d.digits.substr(0, static_cast<std::size_t>(n)) + "." + d.digits.substr(static_cast<std::size_t>(n));
    }
    if (-6 < n && n <= 0) return sign + "0." + std::string(static_cast<std::size_t>(-n), '0') + d.digits;
    std::string mant = k == 1 ? d.digits : d.digits.substr(0, 1) + "." + d.digits.substr(1);
    return sign + mant + exponentSuffix(n - 1);
}

std::string numberToRadixString(double v, int radix) {
    if (radix == 10 || std::isnan(v) || std::isinf(v)) return numberToString(v);
    if (v == 0.0) return "0";
    static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    bool negative = v < 0;
    v = std::fabs(v);
    double ip = std::floor(v);
    double fp = v - ip;
    std::string intPart;
    if (ip == 0) intPart = "0";
    while (ip > 0) {
        double q = std::floor(ip / radix);
        int digit = static_cast<int>(ip - q * radix);
        intPart.insert(intPart.begin(), kDigits[std::clamp(digit, 0, radix - 1)]);
        ip = q;
    }
    std::string frac;
    for (int i = 0; fp > 0 && i < 52; ++i) {
        fp *= radix;
        int digit = static_cast<int>(std::floor(fp));
        frac += kDigits[digit];
        fp -= digit;
    }
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    std::string out = negative ? "-" : "";
    out += intPart;
    if (!frac.empty()) out += "." + frac;
    return out;
}

std::string numberToFixed(double v, int f) {
    if (std::isnan(v)) return "NaN";
    if (std::fabs(v) >= 1e21 || std::isinf(v)) return numberToString(v);
    std::string sign = v < 0 ? "-" : "";
    if (v == 0.0) {
        sign.clear();
        v = 0.0;
    }
    Decimal d = exactDecimal(v);
    int intDigits = v == 0.0 ? 1 : d.exponent + 1;
    Decimal r = roundDigits(d, intDigits + f);
    std::string digits = r.digits;
    int point = r.exponent + 1; // digits before the decimal point
    if (v == 0.0) {
        digits = std::string(static_cast<std::size_t>(1 + f), '0');
        point = 1;
    }
    if (point <= 0) {
        digits.insert(0, static_cast<std::size_t>(1 - point), '0');
        point = 1;
    }
    std::size_t want = static_cast<std::size_t>(point + f);
    if (digits.size() < want) digits.append(want - digits.size(), '0');
    digits.resize(want);
    std::string out = sign + digits.substr(0, static_cast<std::size_t>(point));
    if (f > 0) out += "." + digits.substr(static_cast<std::size_t>(point));
    return out;
}

std::string numberToPrecision(double v, int p) {
    if (std::isnan(v) || std::isinf(v)) return numberToString(v);
    std::string sign = v < 0 ? "-" : "";
    Decimal r;
    if (v == 0.0) {
        sign.clear();
        r.digits = std::string(static_cast<std::size_t>(p), '0');
        r.exponent = 0;
    } else {
        r = roundDigits(exactDecimal(v), p);
    }
    int e = r.exponent;
    if (e < -6 || e >= p) {
        std::string mant = r.digits.substr(0, 1);
        if (p > 1) mant += "." + r.digits.substr(1);
        return sign + mant + exponentSuffix(e);
    }
    if (e == p - 1) return sign + r.digits;
    if (e >= 0) {
        return sign + r.digits.substr(0, static_cast<std::size_t>(e + 1)) + "." +
               r.digits.substr(static_cast<std::size_t>(e + 1));
    }
    return sign + "0." + std::string(static_cast<std::size_t>(-(e + 1)), '0') + r.digits;
}

std::string numberToExponential(double v, std::optional<int> f) {
    if (std::isnan(v) || std::isinf(v)) return numberToString(v);
    std::string sign = v < 0 ? "-" : "";
    Decimal r;
    if (v == 0.0) {
        sign.clear();
        r.digits = std::string(static_cast<std::size_t>(f.value_or(0) + 1), '0');
    } else if (f) {
        r = roundDigits(exactDecimal(v), *f + 1);
    } else {
        r = shortestDecimal(std::fabs(v));
    }
    std::string mant = r.digits.substr(0, 1);
    if (r.digits.size() > 1) mant += "." + r.digits.substr(1);
    return sign + mant + exponentSuffix(r.exponent);
}

double stringToNumber(std::string_view text) {
    std::string_view s = trimWhitespace(text);
    if (s.empty()) return 0.0;
    if (s.size() > 2 && s[0] == '0') {
        int radix = 0;
        char p = s[1];
        if (p == 'x' || p == 'X') radix = 16;
        else if (p == 'o' || p == 'O') radix = 8;
        else if (p == 'b' || p == 'B') radix = 2;
        if (radix) {
            double v = 0.0;
            for (char c : s.substr(2)) {
                int d = digitValue(c);
                if (d >= radix) return std::nan("");
                v = v * radix + d;
            }
            return v;
        }
    }
    bool negative = false;
    std::string_view body = s;
    if (body[0] == '+' || body[0] == '-') {
        negative = body[0] == '-';
        body.remove_prefix(1);
    }
    if (body == "Infinity") return negative ? -HUGE_VAL : HUGE_VAL;
    std::size_t len = decimalPrefix(body);
    if (len == 0 || len != body.size()) return std::nan("");
    double v = parseDecimal(body);
    return negative ? -v : v;
}

double parseFloatPrefix(std::string_view text) {
    std::string_view s = trimWhitespace(text);
    bool negative = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        negative = s[0] == '-';
        s.remove_prefix(1);
    }
    if (s.substr(0, 8) == "Infinity") return negative ? -HUGE_VAL : HUGE_VAL;
    std::size_t len = decimalPrefix(s);
    if (len == 0) return std::nan("");
    double v = parseDecimal(s.substr(0, len));
    return negative ? -v : v;
}

double parseIntPrefix(std::string_view text, int radix) {
    std::string_view s = trimWhitespace(text);
    bool negative = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        negative = s[0] == '-';
        s.remove_prefix(1);
    }
    bool stripPrefix = true;
    if (radix != 0) {
        if (radix < 2 || radix > 36) return std::nan("");
        if (radix != 16) stripPrefix = false;
    } else {
        radix = 10;
    }
    if (stripPrefix && s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
        radix = 16;
    }
    std::size_t end = 0;
    while (end < s.size() && digitValue(s[end]) < radix) ++end;
    if (end == 0) return std::nan("");
    double v = 0.0;
    if (radix == 10 && end > 15) {
        v = parseDecimal(s.substr(0, end));
    } else {
        for (std::size_t i = 0; i < end; ++i) v = v * radix + digitValue(s[i]);
    }
    return negative ? -v : v;
}

std::optional<std::uint32_t> parseArrayIndex(std::string_view text) {
    if (text.empty() || text.size() > 10) return std::nullopt;
    if (text.size() > 1 && text[0] == '0') return std::nullopt;
    std::uint64_t v = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (v >= 4294967295ull) return std::nullopt;
    return static_cast<std::uint32_t>(v);
}

std::uint32_t toUint32(double v) {
    if (!std::isfinite(v) || v == 0.0) return 0;
    double t = std::trunc(v);
    double m = std::fmod(t, 4294967296.0);
    if (m < 0) m += 4294967296.0;
    return static_cast<std::uint32_t>(m);
}

std::int32_t toInt32(double v) {
    return static_cast<std::int32_t>(toUint32(v));
}

} // namespace pinauthor::script
