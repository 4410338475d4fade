#pragma once

#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgw/words.hpp"

namespace rgw {

// Exact rational, used for densities and the (d+eps) comparisons so that no
// threshold is ever crossed by floating-point drift.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }
  explicit Rational(long long n) : num(n), den(1) {}

  void normalize() {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
  Rational operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
  Rational operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
  bool operator==(const Rational&) const = default;
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  bool operator>(const Rational& o) const { return o < *this; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  // Accepts "p/q", integers, and decimal literals like "0.2".
  static Rational parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      long long p = std::stoll(s.substr(0, slash));
      long long q = std::stoll(s.substr(slash + 1));
      return {p, q};
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string intpart = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      if (frac.size() > 12) frac.resize(12);
      long long den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      long long num = (intpart.empty() || intpart == "-" ? 0 : std::stoll(intpart)) * den;
      long long f = frac.empty() ? 0 : std::stoll(frac);
      num += (s[0] == '-') ? -f : f;
      return {num, den};
    }
    return Rational(std::stoll(s));
  }
};

// floor((2m-1)^(d*l)) by exact integer arithmetic: with d*l = a/b in lowest
// terms, the result is the integer b-th root of (2m-1)^a. No floating point.
inline long long relator_count(int m, const Rational& d, int l) {
  if (m < 1 || l < 1) throw std::invalid_argument("relator_count: need m >= 1, l >= 1");
  if (!(d.num > 0 && d.num < d.den)) throw std::invalid_argument("relator_count: need 0 < d < 1");
  const unsigned long long base = static_cast<unsigned long long>(2 * m - 1);
  if (base == 1) return 1;

  long long a = d.num * static_cast<long long>(l);
  long long b = d.den;
  long long g = std::gcd(a, b);
  a /= g;
  b /= g;

  // t = base^a, overflow-checked in 128 bits.
  unsigned __int128 t = 1;
  const unsigned __int128 lim = ~static_cast<unsigned __int128>(0);
  for (long long i = 0; i < a; ++i) {
    if (t > lim / base) throw std::overflow_error("relator_count: (2m-1)^(dl) exceeds capacity");
    t *= base;
  }

  if (b == 1) {
    if (t > static_cast<unsigned __int128>(INT64_MAX))
      throw std::overflow_error("relator_count: result exceeds integer range");
    return static_cast<long long>(t);
  }

  // Largest n with n^b <= t.
  auto pow_leq = [&](unsigned long long n) {
    unsigned __int128 p = 1;
    for (long long i = 0; i < b; ++i) {
      if (n != 0 && p > lim / n) return false;  // p*n overflows => certainly > t
      p *= n;
      if (p > t) return false;
    }
    return true;
  };
  unsigned long long lo = 1, hi = 2;
  while (pow_leq(hi)) {
    lo = hi;
    if (hi > (1ULL << 62)) throw std::overflow_error("relator_count: result exceeds integer range");
    hi *= 2;
  }
  while (lo + 1 < hi) {
    unsigned long long mid = lo + (hi - lo) / 2;
    if (pow_leq(mid)) lo = mid; else hi = mid;
  }
  if (lo > static_cast<unsigned long long>(INT64_MAX))
    throw std::overflow_error("relator_count: result exceeds integer range");
  return static_cast<long long>(lo);
}

struct Presentation {
  int m = 2;
  int l = 4;
  Rational d{1, 5};
  std::uint64_t seed = 0;
  std::vector<Word> relators;

  bool operator==(const Presentation&) const = default;
};

inline Presentation sample_presentation(int m, const Rational& d, int l, std::uint64_t seed) {
  if (l % 2 != 0)
    throw std::invalid_argument("sample_presentation: l must be even (standing assumption of the model)");
  if (m < 2) throw std::invalid_argument("sample_presentation: need m >= 2");
  Presentation p;
  p.m = m;
  p.l = l;
  p.d = d;
  p.seed = seed;
  long long n = relator_count(m, d, l);
  Rng rng(derive_seed(seed, 0));
  p.relators.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) p.relators.push_back(sample_relator(m, l, rng));
  return p;
}

// Text format: first line "m l d seed", then one relator per line.
inline std::string presentation_to_text(const Presentation& p) {
  std::ostringstream os;
  os << p.m << ' ' << p.l << ' ' << p.d.str() << ' ' << p.seed << '\n';
  for (const Word& r : p.relators) os << word_to_string(r, p.m) << '\n';
  return os.str();
}

inline Presentation presentation_from_text(std::istream& in) {
  Presentation p;
  std::string dstr;
  if (!(in >> p.m >> p.l >> dstr >> p.seed))
    throw std::invalid_argument("presentation parse: bad header line");
  p.d = Rational::parse(dstr);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    p.relators.push_back(word_from_string(line, p.m));
  }
  return p;
}

inline Presentation presentation_from_text(const std::string& s) {
  std::istringstream is(s);
  return presentation_from_text(is);
}

}  // namespace rgw
