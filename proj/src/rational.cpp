#include "hqe/rational.hpp"

#include "hqe/error.hpp"

#include <cctype>

namespace hqe {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw Error(ErrorCode::ParseError, "empty rational literal");

  try {
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
      // Decimal literal: scale the digit string by a power of ten.
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      const std::size_t frac_len = s.size() - dot - 1;
      if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument("digits");
      if (digits[0] == '+') digits.erase(0, 1);
      mpz_class num(digits, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
      Rational q(num, den);
      q.canonicalize();
      return q;
    }
    if (s[0] == '+') s.erase(0, 1);
    Rational q(s, 10);
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::ParseError, "not a rational literal: '" + std::string(text) + "'");
  }
}

std::string to_string(const Rational& q) { return q.get_str(10); }

}  // namespace hqe
