#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "rgw/presentation.hpp"
#include "rgw/words.hpp"

using namespace rgw;

TEST_CASE("letter encoding round-trips and inverses") {
  const int m = 3;
  for (int x = 0; x < 2 * m; ++x) {
    Letter lx = static_cast<Letter>(x);
    CHECK(letter_inverse(letter_inverse(lx, m), m) == lx);
    CHECK(letter_from_char(letter_char(lx, m), m) == lx);
    CHECK(letter_generator(letter_inverse(lx, m), m) == letter_generator(lx, m));
    CHECK(letter_sign(letter_inverse(lx, m), m) == -letter_sign(lx, m));
  }
  CHECK_THROWS(letter_from_char('d', 3));
  CHECK_THROWS(letter_from_char('?', 3));
}

TEST_CASE("reduction") {
  const int m = 2;
  CHECK(reduce(word_from_string("aA", m), m).empty());
  CHECK(word_to_string(reduce(word_from_string("abBA", m), m), m) == "");
  CHECK(word_to_string(reduce(word_from_string("abBc", 3), 3), 3) == "ac");
  CHECK(is_reduced(word_from_string("abab", m), m));
  CHECK_FALSE(is_reduced(word_from_string("abBa", m), m));
  CHECK_FALSE(is_cyclically_reduced(word_from_string("abA", m), m));
  CHECK(is_cyclically_reduced(word_from_string("ab", m), m));
  CHECK(word_to_string(cyclic_reduce(word_from_string("abcBA", 3), 3), 3) == "c");
}

TEST_CASE("inverse and rotation") {
  const int m = 2;
  Word w = word_from_string("aabB", m);
  CHECK(word_to_string(word_inverse(w, m), m) == "bBAA");
  CHECK(word_to_string(rotate(w, 1), m) == "abBa");
  CHECK(word_to_string(rotate(w, -1), m) == "Baab");
  CHECK(rotate(w, 4) == w);
}

TEST_CASE("cyclic canonical form is rotation and inversion invariant") {
  const int m = 2;
  Word w = word_from_string("abaB", m);
  Word c = cyclic_canonical(w, m);
  for (int k = 0; k < w.size(); ++k) {
    CHECK(cyclic_canonical(rotate(w, k), m) == c);
    CHECK(cyclic_canonical(rotate(word_inverse(w, m), k), m) == c);
  }
}

TEST_CASE("cyclic translates and inversion") {
  const int m = 2;
  SUBCASE("abab collapses rotations pairwise") {
    auto ts = cyclic_translates_and_inversion(word_from_string("abab", m), m);
    // rotations of abab: {abab, baba}; of its inverse BABA: {BABA, ABAB}
    CHECK(ts.size() == 4);
  }
  SUBCASE("rotation-invariant word") {
    auto ts = cyclic_translates_and_inversion(word_from_string("aaaa", m), m);
    REQUIRE(ts.size() == 2);
    CHECK(word_to_string(ts[0], m) == "aaaa");
    CHECK(word_to_string(ts[1], m) == "AAAA");
  }
  SUBCASE("orbit size divides 2l") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
      Word w = sample_relator(2, 6, rng);
      auto ts = cyclic_translates_and_inversion(w, m);
      CHECK((2 * w.size()) % static_cast<int>(ts.size()) == 0);
    }
  }
}

TEST_CASE("relator_count exact values") {
  CHECK(relator_count(3, Rational(4, 20), 20) == 625);  // 5^4
  CHECK(relator_count(2, Rational(1, 2), 2) == 3);      // floor(3^1)
  CHECK(relator_count(1, Rational(3, 10), 10) == 1);    // base 1
  CHECK(relator_count(3, Rational(1, 5), 12) == 47);    // floor(5^{12/5}) = floor(5^2 * 5^{2/5})
  CHECK(relator_count(2, Rational(1, 10), 10) == 3);
  // Fractional exponents resolved by exact integer roots, never rounded up:
  // floor(3^{5/2}) = floor(15.588) = 15.
  CHECK(relator_count(2, Rational(1, 2), 5) == 15);
  CHECK_THROWS_AS(relator_count(3, Rational(99, 100), 1000), std::overflow_error);
  CHECK_THROWS(relator_count(2, Rational(0, 1), 4));
}

TEST_CASE("relator_count agrees with direct integer powers on exact cases") {
  for (int m : {2, 3, 4}) {
    for (int k = 1; k <= 6; ++k) {
      // d*l integral: count is exactly (2m-1)^k.
      long long expect = 1;
      for (int i = 0; i < k; ++i) expect *= 2 * m - 1;
      CHECK(relator_count(m, Rational(k, 10), 10) == expect);
    }
  }
}

TEST_CASE("sample_relator produces cyclically reduced words, deterministically") {
  Rng rng1(42), rng2(42);
  for (int i = 0; i < 200; ++i) {
    Word w1 = sample_relator(2, 8, rng1);
    Word w2 = sample_relator(2, 8, rng2);
    CHECK(w1 == w2);
    CHECK(w1.size() == 8);
    CHECK(is_cyclically_reduced(w1, 2));
  }
}

TEST_CASE("sample_relator never emits a cancelling adjacent pair at l=2") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    Word w = sample_relator(2, 2, rng);
    CHECK(w[1] != letter_inverse(w[0], 2));
    CHECK(w[0] != letter_inverse(w[1], 2));
  }
}

TEST_CASE("sample_relator uniform over enumerated support (m=2, l=3)") {
  const int m = 2, l = 3;
  // Oracle support: enumerate all cyclically reduced words of length 3.
  std::map<Word, long long> counts;
  std::vector<Word> support;
  for (int a = 0; a < 2 * m; ++a)
    for (int b = 0; b < 2 * m; ++b)
      for (int c = 0; c < 2 * m; ++c) {
        Word w(std::vector<Letter>{static_cast<Letter>(a), static_cast<Letter>(b),
                                   static_cast<Letter>(c)});
        if (is_cyclically_reduced(w, m)) {
          support.push_back(w);
          counts[w] = 0;
        }
      }
  // Per first letter: 3 reduced continuations when w2 = w1 (w3 only avoids
  // w1^{-1}), else 2 (w3 avoids both inverses); 4 * (3 + 2 + 2) = 28.
  REQUIRE(support.size() == 28);

  const long long n = 100000;
  Rng rng(2026);
  for (long long i = 0; i < n; ++i) {
    Word w = sample_relator(m, l, rng);
    auto it = counts.find(w);
    REQUIRE(it != counts.end());
    ++it->second;
  }
  const double p = 1.0 / static_cast<double>(support.size());
  const double mean = n * p;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (auto& [w, c] : counts) {
    CAPTURE(word_to_string(w, m));
    CHECK(std::abs(static_cast<double>(c) - mean) <= 4 * sigma);
  }
}

TEST_CASE("sample_presentation") {
  SUBCASE("relator count and lengths") {
    Presentation p = sample_presentation(3, Rational(1, 5), 20, 1);
    CHECK(p.relators.size() == 625);
    for (const Word& r : p.relators) {
      CHECK(r.size() == 20);
      CHECK(is_cyclically_reduced(r, 3));
    }
  }
  SUBCASE("count follows exact evaluation") {
    Presentation p = sample_presentation(2, Rational(1, 10), 10, 7);
    CHECK(p.relators.size() == 3);
  }
  SUBCASE("determinism") {
    Presentation a = sample_presentation(2, Rational(1, 10), 10, 7);
    Presentation b = sample_presentation(2, Rational(1, 10), 10, 7);
    CHECK(a == b);
    CHECK(presentation_to_text(a) == presentation_to_text(b));
  }
  SUBCASE("odd l rejected") {
    CHECK_THROWS_WITH_AS(sample_presentation(2, Rational(1, 10), 9, 0),
                         doctest::Contains("even"), std::invalid_argument);
  }
}

TEST_CASE("presentation text round-trip") {
  Presentation p = sample_presentation(3, Rational(1, 5), 12, 99);
  std::string text = presentation_to_text(p);
  Presentation q = presentation_from_text(text);
  CHECK(p == q);
  CHECK(presentation_to_text(q) == text);
}

TEST_CASE("rational parsing and arithmetic") {
  CHECK(Rational::parse("1/5") == Rational(1, 5));
  CHECK(Rational::parse("0.2") == Rational(1, 5));
  CHECK(Rational::parse("3") == Rational(3));
  CHECK(Rational::parse("0.15") == Rational(3, 20));
  CHECK((Rational(1, 5) + Rational(1, 100)) == Rational(21, 100));
  CHECK(Rational(1, 5) < Rational(5, 24));
  CHECK((Rational(1, 4) * Rational(2, 3)) == Rational(1, 6));
  CHECK(Rational(1, 5).str() == "1/5");
  CHECK(Rational(4).str() == "4");
}

TEST_CASE("derived seeds differ across indices and masters") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
