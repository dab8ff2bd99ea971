#include "rigmotion/format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include <nlohmann/json.hpp>

namespace rigmotion {
namespace {

// |value| = 0.d0 d1 d2 ... x 10^(point), i.e. digit i has place value
// 10^(point - 1 - i).
struct DecimalDigits {
  bool negative = false;
  std::string digits;
  int point = 0;
};

DecimalDigits decompose(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific);
  std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));

  DecimalDigits out;
  if (!text.empty() && text.front() == '-') {
    out.negative = true;
    text.remove_prefix(1);
  }
  const auto e = text.find('e');
  const std::string_view mantissa = text.substr(0, e);
  int exponent = 0;
  std::from_chars(text.data() + e + 1 + (text[e + 1] == '+' ? 1 : 0), text.data() + text.size(),
                  exponent);
  for (char c : mantissa) {
    if (c != '.') out.digits.push_back(c);
  }
  out.point = exponent + 1;
  return out;
}

// Keeps the first `keep` digits, rounding half away from zero on the rest.
void round_to(DecimalDigits& d, int keep) {
  if (keep >= static_cast<int>(d.digits.size())) return;
  if (keep < 0) {
    d.digits = "0";
    d.point = 1;
    return;
  }
  const bool round_up = d.digits[keep] >= '5';
  d.digits.resize(keep);
  if (round_up) {
    int i = keep - 1;
    while (i >= 0 && d.digits[i] == '9') {
      d.digits[i] = '0';
      --i;
    }
    if (i >= 0) {
      ++d.digits[i];
    } else {
      d.digits.insert(d.digits.begin(), '1');
      ++d.point;
    }
  }
  if (d.digits.empty()) {
    d.digits = "0";
    d.point = 1;
  }
}

bool is_zero(const DecimalDigits& d) { return d.digits.find_first_not_of('0') == std::string::npos; }

std::string render(const DecimalDigits& d, int min_places = 0) {
  if (is_zero(d)) {
    std::string zero = "0";
    if (min_places > 0) zero += "." + std::string(min_places, '0');
    return zero;
  }
  std::string integer;
  std::string fraction;
  const int n = static_cast<int>(d.digits.size());
  if (d.point <= 0) {
    integer = "0";
    fraction = std::string(-d.point, '0') + d.digits;
  } else if (d.point >= n) {
    integer = d.digits + std::string(d.point - n, '0');
  } else {
    integer = d.digits.substr(0, d.point);
    fraction = d.digits.substr(d.point);
  }
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  if (static_cast<int>(fraction.size()) < min_places) {
    fraction.append(min_places - fraction.size(), '0');
  }
  std::string out = d.negative ? "-" : "";
  out += integer;
  if (!fraction.empty()) out += "." + fraction;
  return out;
}

}  // namespace

std::string format_shortest(double value) {
  if (value == 0.0) return "0";
  return render(decompose(value));
}

std::string round_significant(double value, int digits) {
  if (value == 0.0) return "0";
  DecimalDigits d = decompose(value);
  round_to(d, digits);
  return render(d);
}

std::string round_decimals(double value, int places) {
  if (value == 0.0) return "0";
  DecimalDigits d = decompose(value);
  const int keep = d.point + places;
  if (keep == 0) {
    // First digit sits just past the last kept place.
    if (d.digits[0] >= '5') {
      d.digits = "1";
      d.point += 1;
    } else {
      return "0";
    }
  } else {
    round_to(d, keep);
  }
  return render(d);
}

std::string format_fixed(double value, int places) {
  if (value == 0.0) return render(DecimalDigits{false, "0", 1}, places);
  DecimalDigits d = decompose(value);
  const int keep = d.point + places;
  if (keep == 0) {
    if (d.digits[0] >= '5') {
      d.digits = "1";
      d.point += 1;
    } else {
      d.digits = "0";
    }
  } else {
    round_to(d, keep);
  }
  return render(d, places);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  if (text[0] == '+' || text[0] == '-') ++i;
  // from_chars accepts "inf"/"nan"; require a digit or '.' up front.
  if (i >= text.size() || !(std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
    return std::nullopt;
  }
  const char* first = text.data() + (text[0] == '+' ? 1 : 0);
  const char* last = text.data() + text.size();
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string json_quote(std::string_view text) {
  return nlohmann::json(std::string(text)).dump(-1, ' ', false,
                                                nlohmann::json::error_handler_t::replace);
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

}  // namespace rigmotion
