#include "verstore/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace verstore {

namespace {

long long parse_ll(const std::string& s) {
  if (s.empty()) throw ParseError("empty number");
  size_t pos = 0;
  long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw ParseError("trailing characters in number: " + s);
  return v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    return Rational(parse_ll(text.substr(0, slash)), parse_ll(text.substr(slash + 1)));
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(parse_ll(text));
  std::string head = text.substr(0, dot);
  std::string frac = text.substr(dot + 1);
  if (frac.empty()) return Rational(parse_ll(head));
  for (char c : frac)
    if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("bad decimal: " + text);
  bool neg = !head.empty() && head[0] == '-';
  long long whole = head.empty() || head == "-" ? 0 : parse_ll(head);
  long long den = 1;
  for (size_t i = 0; i < frac.size(); ++i) den = checked_mul(den, 10);
  long long num = checked_add(checked_mul(whole < 0 ? -whole : whole, den), parse_ll(frac));
  if (neg || whole < 0) num = -num;
  return Rational(num, den);
}

}  // namespace verstore
