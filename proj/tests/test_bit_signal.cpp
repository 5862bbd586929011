#include <doctest.h>

#include <stdexcept>

#include "dimsig/bit_signal.hpp"

using namespace dimsig;

TEST_SUITE("bit_signal") {
  TEST_CASE("parsing and packing") {
    const BitSignal x = BitSignal::parse("0100 0001\n1");
    CHECK(x.size() == 9);
    CHECK(x.ones() == 3);
    CHECK(x.to_string() == "010000011");
    CHECK(x.pack() == std::vector<std::uint8_t>{0x41, 0x80});
    const std::uint8_t bytes[] = {0xA5, 0x0F};
    CHECK(BitSignal::from_bytes(bytes).to_string() == "1010010100001111");
    CHECK_THROWS_AS(BitSignal::parse("0102"), std::invalid_argument);
    CHECK_THROWS_AS(BitSignal(std::vector<Bit>{0, 2}), std::invalid_argument);
  }

  TEST_CASE("slices and complements") {
    const BitSignal x = BitSignal::parse("0011010");
    CHECK(x.complement().to_string() == "1100101");
    CHECK(x.prefix(3).to_string() == "001");
    CHECK(x.slice(2, 3).to_string() == "110");
    CHECK(x.ones_fraction() == doctest::Approx(3.0 / 7.0));
    CHECK_THROWS_AS(x.slice(5, 3), std::out_of_range);
  }

  TEST_CASE("grids") {
    const BitSignal x = BitSignal::parse("000111010101");
    Grid g(Shape::volume(2, 3, 2), std::vector<Bit>(x.bits().begin(), x.bits().end()));
    CHECK(g.at(1, 0, 0) == 1);
    CHECK(g.at(0, 1, 1) == 1);
    CHECK(g.plane(1).flatten().to_string() == "010101");
    CHECK(g.flatten() == x);
    CHECK(g.complement().flatten() == x.complement());
    CHECK(Shape::volume(2, 3, 2).to_string() == "2x3x2");
    CHECK(Shape::plane(32, 64).to_string() == "32x64");
    CHECK_THROWS_AS(Grid(Shape::plane(2, 2), std::vector<Bit>{0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(Shape::plane(0, 2)), std::invalid_argument);
  }
}
