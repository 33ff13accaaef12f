#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pinauthor::script {

// Shortest round-trip rendering with ECMAScript Number::toString rules.
std::string numberToString(double value);
std::string numberToRadixString(double value, int radix);

std::string numberToFixed(double value, int fractionDigits);
std::string numberToPrecision(double value, int precision);
std::string numberToExponential(double value, std::optional<int> fractionDigits);

// StringToNumber: whole-string numeric literal, NaN when malformed.
double stringToNumber(std::string_view text);
double parseFloatPrefix(std::string_view text);
double parseIntPrefix(std::string_view text, int radix);

// Canonical array index ("0", "17"; not "01" or "-1").
std::optional<std::uint32_t> parseArrayIndex(std::string_view text);

std::int32_t toInt32(double value);
std::uint32_t toUint32(double value);

std::string_view trimWhitespace(std::string_view text);

} // namespace pinauthor::script
