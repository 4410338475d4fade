#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgw/rng.hpp"

namespace rgw {

// A letter over m generators is encoded as an integer in [0, 2m):
// g in [0, m) is the generator s_{g+1}, g + m is its formal inverse.
// Printed as 'a'..'z' for generators and 'A'..'Z' for inverses.
using Letter = std::uint8_t;

inline Letter letter_inverse(Letter x, int m) {
  return static_cast<Letter>((x + m) % (2 * m));
}

inline int letter_generator(Letter x, int m) { return x % m; }
inline int letter_sign(Letter x, int m) { return x < m ? +1 : -1; }

inline char letter_char(Letter x, int m) {
  return x < m ? static_cast<char>('a' + x) : static_cast<char>('A' + (x - m));
}

inline Letter letter_from_char(char c, int m) {
  if (c >= 'a' && c < 'a' + m) return static_cast<Letter>(c - 'a');
  if (c >= 'A' && c < 'A' + m) return static_cast<Letter>(c - 'A' + m);
  throw std::invalid_argument(std::string("invalid letter '") + c + "' for m=" + std::to_string(m));
}

// A word in the free group on m generators. Reduction state is the caller's
// responsibility; use reduce()/cyclic_reduce() to normalize.
struct Word {
  std::vector<Letter> letters;

  Word() = default;
  explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

  int size() const { return static_cast<int>(letters.size()); }
  bool empty() const { return letters.empty(); }
  Letter operator[](int i) const { return letters[static_cast<std::size_t>(i)]; }

  bool operator==(const Word&) const = default;
  auto operator<=>(const Word&) const = default;
};

inline bool is_reduced(const Word& w, int m) {
  for (int i = 0; i + 1 < w.size(); ++i)
    if (w[i + 1] == letter_inverse(w[i], m)) return false;
  return true;
}

inline bool is_cyclically_reduced(const Word& w, int m) {
  if (!is_reduced(w, m)) return false;
  if (w.size() >= 2 && w[0] == letter_inverse(w[w.size() - 1], m)) return false;
  return true;
}

inline Word reduce(const Word& w, int m) {
  std::vector<Letter> out;
  out.reserve(w.letters.size());
  for (Letter x : w.letters) {
    if (!out.empty() && out.back() == letter_inverse(x, m))
      out.pop_back();
    else
      out.push_back(x);
  }
  return Word(std::move(out));
}

inline Word cyclic_reduce(const Word& w, int m) {
  Word r = reduce(w, m);
  while (r.size() >= 2 && r[0] == letter_inverse(r[r.size() - 1], m)) {
    r.letters.erase(r.letters.begin());
    r.letters.pop_back();
  }
  return r;
}

inline Word word_inverse(const Word& w, int m) {
  std::vector<Letter> out(w.letters.rbegin(), w.letters.rend());
  for (Letter& x : out) x = letter_inverse(x, m);
  return Word(std::move(out));
}

inline Word rotate(const Word& w, int k) {
  if (w.empty()) return w;
  int n = w.size();
  k = ((k % n) + n) % n;
  std::vector<Letter> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(w[(i + k) % n]);
  return Word(std::move(out));
}

inline Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
  return out;
}

// Lexicographically minimal rotation over both orientations; the canonical
// form used as a memo key for cyclic words.
inline Word cyclic_canonical(const Word& w, int m) {
  if (w.empty()) return w;
  Word best = w;
  for (const Word& base : {w, word_inverse(w, m)}) {
    for (int k = 0; k < base.size(); ++k) {
      Word r = rotate(base, k);
      if (r < best) best = r;
    }
  }
  return best;
}

// All cyclic rotations of w and of w^{-1}, deduplicated.
inline std::vector<Word> cyclic_translates_and_inversion(const Word& w, int m) {
  std::set<Word> out;
  Word inv = word_inverse(w, m);
  for (int k = 0; k < std::max(1, w.size()); ++k) {
    out.insert(rotate(w, k));
    out.insert(rotate(inv, k));
  }
  return std::vector<Word>(out.begin(), out.end());
}

inline std::string word_to_string(const Word& w, int m) {
  std::string s;
  s.reserve(w.letters.size());
  for (Letter x : w.letters) s.push_back(letter_char(x, m));
  return s;
}

inline Word word_from_string(const std::string& s, int m) {
  std::vector<Letter> ls;
  ls.reserve(s.size());
  for (char c : s) ls.push_back(letter_from_char(c, m));
  return Word(std::move(ls));
}

// Uniform over cyclically reduced words of length l: uniform reduced-word
// sampling with rejection when the last letter inverts the first.
inline Word sample_relator(int m, int l, Rng& rng) {
  if (m < 1 || l < 1) throw std::invalid_argument("sample_relator: need m >= 1, l >= 1");
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    std::vector<Letter> ls;
    ls.reserve(static_cast<std::size_t>(l));
    ls.push_back(static_cast<Letter>(rng.below_int(2 * m)));
    for (int i = 1; i < l; ++i) {
      Letter forbidden = letter_inverse(ls.back(), m);
      int r = rng.below_int(2 * m - 1);
      Letter x = static_cast<Letter>(r >= forbidden ? r + 1 : r);
      ls.push_back(x);
    }
    Word w(std::move(ls));
    if (is_cyclically_reduced(w, m)) return w;
  }
  throw std::runtime_error("sample_relator: rejection loop failed to terminate");
}

}  // namespace rgw
