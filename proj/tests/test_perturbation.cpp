#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "dimsig/encodings.hpp"
#include "dimsig/perturbation.hpp"
#include "test_paths.hpp"

using namespace dimsig;

namespace {

const CtmTable& table1d() {
  static const CtmTable t = load_table(data_path("ctm1d_s3_t200.ctm"));
  return t;
}

BitSignal random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Bit> bits(n);
  for (auto& b : bits) b = static_cast<Bit>(rng() & 1);
  return BitSignal(bits);
}

BitSignal bits_of(unsigned value, std::size_t len) {
  std::vector<Bit> bits(len);
  for (std::size_t i = 0; i < len; ++i) bits[i] = static_cast<Bit>((value >> (len - 1 - i)) & 1);
  return BitSignal(bits);
}

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("splitmix64 reference value") {
    // First output of the reference SplitMix64 generator seeded with 0.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
    CHECK(trial_seed(1, 2, 3) == splitmix64(splitmix64(splitmix64(1) ^ 2) ^ 3));
    CHECK(trial_seed(0, 0, 1) != trial_seed(0, 1, 0));
  }

  TEST_CASE("bounded draws") {
    TrialRng rng(42);
    for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
    CHECK(rng.below(1) == 0);
    CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
  }

  TEST_CASE("flip positions are distinct, sorted and roughly uniform") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto pos = sample_flip_positions(100, 37, seed);
      REQUIRE(pos.size() == 37);
      CHECK(std::is_sorted(pos.begin(), pos.end()));
      CHECK(std::adjacent_find(pos.begin(), pos.end()) == pos.end());
      CHECK(pos.back() < 100);
    }
    CHECK(sample_flip_positions(10, 3, 5) == sample_flip_positions(10, 3, 5));
    std::vector<int> hits(10, 0);
    for (std::uint64_t t = 0; t < 20000; ++t) hits[sample_flip_positions(10, 1, trial_seed(9, 1, t))[0]]++;
    for (int h : hits) CHECK(std::abs(h - 2000) < 200);
    CHECK_THROWS_AS(sample_flip_positions(3, 4, 0), std::invalid_argument);
  }

  TEST_CASE("k = 0 and k = s") {
    const BitSignal x = random_signal(57, 3);
    CHECK(flip_bits(x, 0, 123) == x);
    CHECK(flip_bits(x, 57, 123) == x.complement());
  }

  TEST_CASE("ones-count law over every flip set of every 8-bit signal") {
    for (unsigned v = 0; v < 256; ++v) {
      const BitSignal x = bits_of(v, 8);
      for (unsigned mask = 0; mask < 256; ++mask) {
        std::vector<std::size_t> pos;
        long flipped_zeros = 0, flipped_ones = 0;
        for (std::size_t i = 0; i < 8; ++i) {
          if (!((mask >> (7 - i)) & 1)) continue;
          pos.push_back(i);
          (x[i] ? flipped_ones : flipped_zeros)++;
        }
        const BitSignal y = apply_flips(x, pos);
        REQUIRE(static_cast<long>(y.ones()) - static_cast<long>(x.ones()) == flipped_zeros - flipped_ones);
        REQUIRE(y == bits_of(v ^ mask, 8));
      }
    }
  }

  TEST_CASE("description lengths") {
    const auto d = flip_description(8, 2);
    CHECK(d.header_bits == doctest::Approx(std::log2(9.0)));
    CHECK(d.index_bits == doctest::Approx(std::log2(28.0)));
    CHECK(flip_description(402, 0).index_bits == doctest::Approx(0.0));
    CHECK(flip_description(402, 402).index_bits == doctest::Approx(0.0));
    const std::size_t cuts[] = {4, 8, 12};
    const auto s = scramble_description(16, cuts);
    CHECK(s.header_bits == doctest::Approx(std::log2(17.0)));
    CHECK(s.index_bits == doctest::Approx(std::log2(24.0)));
  }

  TEST_CASE("quantiles") {
    const double v[] = {1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted(v, 1.0) == 4);
    const Stats s = summarize({4, 1, 3, 2});
    CHECK(s.min == 1);
    CHECK(s.max == 4);
    CHECK(s.median == 2.5);
    CHECK(s.mean == 2.5);
    CHECK_THROWS_AS(summarize({}), std::invalid_argument);
  }

  TEST_CASE("schedules") {
    const auto d = default_schedule(402);
    CHECK(d.size() == 32);
    CHECK(d.front() == 0);
    CHECK(d.back() == 402);
    CHECK(std::adjacent_find(d.begin(), d.end(), std::greater_equal<>()) == d.end());
    const auto p = parse_schedule("0:402:16", 402);
    CHECK(p.size() == 27);
    CHECK(p[1] == 16);
    CHECK(p[25] == 400);
    CHECK(p.back() == 402);
    CHECK(parse_schedule("0:8:4", 8) == std::vector<std::size_t>{0, 4, 8});
    CHECK(default_schedule(5).size() == 6);
    CHECK_THROWS_AS(parse_schedule("0:500:16", 402), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule("0:10:0", 402), std::invalid_argument);
  }

  TEST_CASE("flip experiment end points and determinism") {
    const BitSignal x = encode("we have many slight differences", EncodingScheme::utf8());
    FlipExperimentPlan plan;
    plan.schedule = {0, 40, x.size()};
    plan.trials_per_k = 64;
    plan.master_seed = 7;
    plan.threads = 1;
    const auto rows = run_flip_experiment(x, plan, &table1d());
    REQUIRE(rows.size() == 3);
    for (Metric m : plan.metrics) {
      const double original = measure(x, m, &table1d(), 8, 8);
      const double flipped = measure(x.complement(), m, &table1d(), 8, 8);
      const Stats& s0 = rows[0].at(m);
      CHECK(s0.min == original);
      CHECK(s0.q1 == original);
      CHECK(s0.median == original);
      CHECK(s0.max == original);
      const Stats& s1 = rows[2].at(m);
      CHECK(s1.min == flipped);
      CHECK(s1.median == flipped);
      CHECK(s1.max == flipped);
    }
    plan.threads = 4;
    CHECK(trial_summaries_csv(run_flip_experiment(x, plan, &table1d())) == trial_summaries_csv(rows));
    CHECK(trial_summaries_csv(rows).rfind("k,metric,min,q1,median,q3,max,mean\n", 0) == 0);
    plan.master_seed = 8;
    CHECK(trial_summaries_csv(run_flip_experiment(x, plan, &table1d())) != trial_summaries_csv(rows));
    plan.schedule = {0, 0};
    CHECK_THROWS_AS(run_flip_experiment(x, plan, &table1d()), std::invalid_argument);
  }

  TEST_CASE("scramble permutes whole segments") {
    const BitSignal x = random_signal(96, 4);
    const auto cuts = uniform_boundaries(96, 16);
    CHECK(cuts == std::vector<std::size_t>{16, 32, 48, 64, 80});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const BitSignal y = scramble(x, cuts, seed);
      REQUIRE(y.size() == x.size());
      std::vector<std::string> a, b;
      for (std::size_t i = 0; i < 6; ++i) {
        a.push_back(x.slice(16 * i, 16).to_string());
        b.push_back(y.slice(16 * i, 16).to_string());
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
    const std::size_t leading_zero[] = {0};
    const std::size_t descending[] = {32, 16};
    const std::size_t outside[] = {97};
    CHECK(scramble(x, std::span<const std::size_t>(), 3) == x);
    CHECK(scramble(x, leading_zero, 3) == x);
    CHECK_THROWS_AS(scramble(x, descending, 3), std::invalid_argument);
    CHECK_THROWS_AS(scramble(x, outside, 3), std::invalid_argument);
    const BitSignal twice = BitSignal::parse("0110100101101001");
    const std::size_t half[] = {8};
    for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(scramble(twice, half, seed) == twice);
    const auto perm = segment_permutation(10, 77);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);
  }

  TEST_CASE("scramble experiment with an identity permutation collapses") {
    const BitSignal x = random_signal(64, 8);
    const std::size_t cut[] = {32};
    std::uint64_t master = 0;
    while (segment_permutation(2, trial_seed(master, 0, 0)) != std::vector<std::size_t>{0, 1}) ++master;
    ScrambleParams p;
    p.trials = 1;
    p.master_seed = master;
    const ScrambleResult r = scramble_experiment(x, cut, p, nullptr);
    CHECK(r.values.size() == 1);
    CHECK(r.values[0] == r.original);
    CHECK(r.stats.min == r.original);
    CHECK(r.stats.max == r.original);
    CHECK(r.fraction_le == 1.0);
    CHECK(r.percentile == 0.5);
  }

  TEST_CASE("scrambling structure costs compressibility, scrambling noise does not") {
    std::string text;
    while (text.size() < 640) text += "the cat sat on the mat and the dog sat on the log. ";
    const BitSignal structured = encode(text.substr(0, 640), EncodingScheme::utf8());
    const auto cuts = uniform_boundaries(structured.size(), 64);
    ScrambleParams p;
    p.threads = 2;
    const ScrambleResult r = scramble_experiment(structured, cuts, p, nullptr);
    CHECK(r.original < r.stats.median);
    CHECK(r.values.size() == 200);

    const BitSignal noise = random_signal(4096, 21);
    const ScrambleResult n = scramble_experiment(noise, uniform_boundaries(4096, 64), p, nullptr);
    CHECK(n.percentile >= 0.05);
    CHECK(n.percentile <= 0.95);
    CHECK(r.percentile < 0.05);
    std::size_t total = 0;
    for (auto c : n.change_histogram.counts) total += c;
    CHECK(total == 200);
  }
}
