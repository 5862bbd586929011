#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <random>

#include "dimsig/reconstruct.hpp"
#include "test_paths.hpp"

using namespace dimsig;

namespace {

const CtmTable& table2d() {
  static const CtmTable t = load_table(data_path("ctm2d_s2_t200.ctm"));
  return t;
}

Grid random_grid(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Bit> cells(shape.cells());
  for (auto& b : cells) b = static_cast<Bit>(rng() & 1);
  return Grid(shape, cells);
}

std::size_t ones(const Grid& g) { return static_cast<std::size_t>(std::count(g.cells().begin(), g.cells().end(), 1)); }

}  // namespace

TEST_SUITE("reconstruct") {
  TEST_CASE("row-major reshape") {
    const BitSignal x = BitSignal::parse("101100");
    const Grid g = reshape(x, Shape::plane(2, 3));
    CHECK(g.flatten() == x);
    CHECK(g.at(0, 2) == 1);
    CHECK(g.at(1, 0) == 1);
    CHECK(g.at(0, 1) == 0);

    const BitSignal ten = BitSignal::parse("0110101101");
    const Grid t = reshape(ten, Partition::of(Shape::plane(3, 3), 10));
    CHECK(t.shape().cells() == 9);
    CHECK(t.flatten() == ten.prefix(9));

    const BitSignal v = BitSignal::parse("0000000011111111");
    const Grid vol = reshape(v, Shape::volume(2, 4, 2));
    CHECK(vol.at(1, 3, 0) == 0);
    CHECK(vol.at(0, 0, 1) == 1);
    CHECK_THROWS_AS(reshape(ten, Shape::plane(4, 3)), std::invalid_argument);
  }

  TEST_CASE("mirror flips are involutions") {
    const Grid g = random_grid(Shape::volume(5, 6, 3), 1);
    for (int mask = 0; mask < 8; ++mask) {
      const Flips f{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
      CHECK(mirror(mirror(g, f), f) == g);
    }
    const Grid h = mirror(g, {false, true, false});
    CHECK(h.at(0, 0, 0) == g.at(0, 5, 0));
    CHECK(h.at(4, 2, 1) == g.at(4, 3, 1));
    const Grid rotated = rotate_axes(g);
    CHECK(rotated.shape().rows == 6);
    CHECK(rotated.shape().cols == 3);
    CHECK(rotated.shape().planes == 5);
    CHECK(rotate_axes(rotate_axes(rotated)) == g);
  }

  TEST_CASE("orientation variants") {
    const Grid g = random_grid(Shape::plane(9, 11), 2);
    const auto v = orientation_candidates(g, table2d());
    REQUIRE(v.size() == 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(ones(v[i].grid) == ones(g));
      CHECK(v[i].grid == mirror(g, v[i].flips));
      if (i) CHECK(v[i - 1].score <= v[i].score);
    }
    const auto vol = orientation_candidates(random_grid(Shape::volume(6, 5, 4), 3), table2d());
    CHECK(vol.size() == 8);
    CHECK_THROWS_AS(orientation_candidates(Grid(Shape::plane(3, 8)), table2d()), std::invalid_argument);
  }

  TEST_CASE("a half turn scores like the original") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Grid g = random_grid(Shape::plane(8, 10), 10 + seed);
      const auto v = orientation_candidates(g, table2d());
      auto score_of = [&](Flips f) {
        return std::find_if(v.begin(), v.end(), [&](const auto& o) { return o.flips == f; })->score;
      };
      CHECK(score_of({true, true, false}) == score_of({false, false, false}));
      CHECK(score_of({true, false, false}) == score_of({false, true, false}));
    }
  }

  TEST_CASE("symmetric grid ties resolve toward fewer flips") {
    Grid g(Shape::plane(6, 8));
    std::mt19937_64 rng(4);
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        const Bit b = static_cast<Bit>(rng() & 1);
        g.at(r, c) = b;
        g.at(r, 7 - c) = b;
      }
    }
    const auto v = orientation_candidates(g, table2d());
    // Identity and column flip tie, and so do the row flip and the half turn.
    const auto id = std::find_if(v.begin(), v.end(), [](const auto& x) { return x.flip_count() == 0; });
    const auto col = std::find_if(v.begin(), v.end(), [](const auto& x) { return x.flips == Flips{false, true, false}; });
    CHECK(id->score == col->score);
    CHECK(id < col);
    const auto row = std::find_if(v.begin(), v.end(), [](const auto& x) { return x.flips == Flips{true, false, false}; });
    const auto both = std::find_if(v.begin(), v.end(), [](const auto& x) { return x.flip_count() == 2; });
    CHECK(row < both);
  }

  TEST_CASE("PBM export") {
    const Grid g = reshape(BitSignal::parse("101100"), Shape::plane(2, 3));
    CHECK(to_pbm(g) == "P1\n3 2\n1 0 1\n1 0 0\n");
    const Grid vol = reshape(BitSignal::parse("0000000011111111"), Shape::volume(2, 4, 2));
    CHECK(to_pbm(vol, 1) == "P1\n4 2\n1 1 1 1\n1 1 1 1\n");
    CHECK_THROWS_AS(to_pbm(vol, 2), std::out_of_range);
  }
}
