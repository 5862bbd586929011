#include <doctest.h>

#include <stdexcept>

#include "dimsig/encodings.hpp"
#include "dimsig/error.hpp"

using namespace dimsig;

TEST_SUITE("encodings") {
  TEST_CASE("utf8 and balanced") {
    CHECK(encode("A", EncodingScheme::utf8()).to_string() == "01000001");
    CHECK(encode("A", EncodingScheme::balanced()).to_string() == "0100000110111110");
    CHECK(encode("", EncodingScheme::utf8()).empty());
    const BitSignal b = encode("Origin of Species", EncodingScheme::balanced());
    CHECK(b.size() == 17 * 16);
    CHECK(b.ones() * 2 == b.size());
    CHECK_THROWS_AS(encode("caf\xc3\xa9", EncodingScheme::utf8()), std::invalid_argument);
  }

  TEST_CASE("indicator encodings") {
    CHECK(encode("aB c", EncodingScheme::vowels()).to_string() == "1000");
    CHECK(encode("aB c", EncodingScheme::spaces()).to_string() == "0010");
    CHECK(encode("AEIOUaeiou xyz", EncodingScheme::vowels()).ones() == 10);
    CHECK(encode("xyzzy", EncodingScheme::indicator({'z'})).to_string() == "00110");
    CHECK_THROWS_AS(EncodingScheme::indicator({}), std::invalid_argument);
  }

  TEST_CASE("round trips") {
    CHECK(decode(encode("Origin", EncodingScheme::utf8()), EncodingScheme::utf8()) == "Origin");
    CHECK(decode(encode("Origin", EncodingScheme::balanced()), EncodingScheme::balanced()) == "Origin");
  }

  TEST_CASE("decoding failures") {
    try {
      decode(BitSignal::parse("0100000101000001"), EncodingScheme::balanced());
      FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
      CHECK(e.index() == 0);
    }
    try {
      decode(BitSignal::parse("0100000110111110 0100001001000010"), EncodingScheme::balanced());
      FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
      CHECK(e.index() == 1);
    }
    CHECK_THROWS_AS(decode(BitSignal::parse("1000"), EncodingScheme::vowels()), std::invalid_argument);
    CHECK_THROWS_AS(decode(BitSignal::parse("0100000"), EncodingScheme::utf8()), std::invalid_argument);
  }

  TEST_CASE("scheme names") {
    for (const char* name : {"utf8", "balanced", "vowel", "space"}) {
      CHECK(EncodingScheme::parse(name).name() == name);
    }
    const EncodingScheme set = EncodingScheme::parse("set:xy");
    CHECK(set.kind() == EncodingScheme::Kind::indicator);
    CHECK(set.indicator_set() == std::set<char>{'x', 'y'});
    CHECK(EncodingScheme::parse("utf8").bits_per_char() == 8);
    CHECK(EncodingScheme::parse("balanced").bits_per_char() == 16);
    CHECK(EncodingScheme::parse("vowel").bits_per_char() == 1);
    CHECK_FALSE(EncodingScheme::parse("vowel").invertible());
    CHECK_THROWS_AS(EncodingScheme::parse("latin1"), std::invalid_argument);
    CHECK_THROWS_AS(EncodingScheme::parse("set:"), std::invalid_argument);
  }
}
