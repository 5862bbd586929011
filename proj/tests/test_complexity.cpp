#include <doctest.h>

#include <stdexcept>

#include <json.hpp>

#include <cmath>
#include <random>
#include <set>

#include "dimsig/complexity.hpp"
#include "dimsig/ctm_table.hpp"
#include "test_paths.hpp"

using namespace dimsig;

namespace {

const CtmTable& table1d() {
  static const CtmTable t = load_table(data_path("ctm1d_s3_t200.ctm"));
  return t;
}

const CtmTable& table2d() {
  static const CtmTable t = load_table(data_path("ctm2d_s2_t200.ctm"));
  return t;
}

BitSignal random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Bit> bits(n);
  for (auto& b : bits) b = static_cast<Bit>(rng() & 1);
  return BitSignal(bits);
}

Grid random_grid(Shape shape, std::uint64_t seed) {
  const BitSignal x = random_signal(shape.cells(), seed);
  return Grid(shape, std::vector<Bit>(x.bits().begin(), x.bits().end()));
}

std::size_t lzw_reference(const std::string& s) {
  std::set<std::string> dict{"0", "1"};
  std::string w;
  for (char c : s) {
    if (dict.count(w + c)) {
      w += c;
    } else {
      dict.insert(w + c);
      w = std::string(1, c);
    }
  }
  return dict.size();
}

}  // namespace

TEST_SUITE("complexity") {
  TEST_CASE("shannon entropy") {
    std::string balanced;
    for (int i = 0; i < 201; ++i) balanced += "01";
    CHECK(shannon_entropy(BitSignal::parse(balanced)) == 1.0);
    CHECK(shannon_entropy(BitSignal(1000, 0)) == 0.0);
    CHECK(shannon_entropy(BitSignal(7, 1)) == 0.0);
    CHECK(shannon_entropy(BitSignal::parse("00010001")) == doctest::Approx(0.811278).epsilon(1e-6));
    CHECK_THROWS_AS(shannon_entropy(BitSignal()), std::invalid_argument);
  }

  TEST_CASE("block entropy") {
    CHECK(block_entropy(BitSignal::parse("01010101"), 2) == 0.0);
    CHECK(block_entropy(BitSignal::parse("0011"), 2) == 1.0);
    CHECK(block_entropy(BitSignal::parse("010011"), 2) == doctest::Approx(std::log2(3.0)));
    CHECK(block_entropy(BitSignal::parse("0011100"), 2) == doctest::Approx(std::log2(3.0)));  // trailing 0 dropped
    CHECK(block_entropy(BitSignal::parse("001100111"), 2) == 1.0);
    CHECK_THROWS_AS(block_entropy(BitSignal::parse("01"), 0), std::invalid_argument);
  }

  TEST_CASE("LZW hand traces") {
    CHECK(lzw_dict_len(BitSignal()) == 2);
    CHECK(lzw_dict_len(BitSignal::parse("01")) == 3);
    CHECK(lzw_dict_len(BitSignal::parse("0000")) == 4);
  }

  TEST_CASE("LZW matches a brute-force trace on every signal up to 16 bits") {
    for (std::size_t len = 0; len <= 16; ++len) {
      for (std::uint32_t v = 0; v < (1u << len); ++v) {
        std::string s;
        for (std::size_t i = 0; i < len; ++i) s += ((v >> (len - 1 - i)) & 1) ? '1' : '0';
        REQUIRE(lzw_dict_len(BitSignal::parse(s)) == lzw_reference(s));
      }
    }
  }

  TEST_CASE("deflate length") {
    const BitSignal zeros(4096, 0);
    const BitSignal noise = random_signal(4096, 1);
    CHECK(deflate_b64_len(zeros) < deflate_b64_len(noise));
    CHECK(deflate_b64_len(noise) % 4 == 0);
    CHECK(deflate_b64_len(zeros) % 4 == 0);
    CHECK(deflate_b64_len(noise) == deflate_b64_len(noise));
    CHECK(base64_length(0) == 0);
    CHECK(base64_length(1) == 4);
    CHECK(base64_length(3) == 4);
    CHECK(base64_length(4) == 8);
    // A random 512-byte payload is stored, not shrunk.
    CHECK(deflate_b64_len(noise) >= base64_length(512));
  }

  TEST_CASE("metric names") {
    CHECK(parse_metric("bdm") == Metric::bdm);
    CHECK(parse_metric("zlib") == Metric::deflate);
    CHECK(metric_name(Metric::block_entropy) == "block_entropy");
    CHECK_THROWS_AS(parse_metric("gzip9"), std::invalid_argument);
  }

  TEST_CASE("bdm_1d block identities") {
    const CtmTable& t = table1d();
    const std::string block = "01101001";
    const double ctm = t.lookup(Pattern::line(block)).bits;
    CHECK(bdm_1d(BitSignal::parse(block), t).bits == ctm);
    for (int k : {2, 3, 5, 8, 50}) {
      std::string s;
      for (int i = 0; i < k; ++i) s += block;
      const BdmResult r = bdm_1d(BitSignal::parse(s), t);
      CHECK(r.bits == ctm + std::log2(static_cast<double>(k)));
      CHECK(r.window_count == static_cast<std::size_t>(k));
      CHECK(r.distinct == 1);
    }
    // Same with a block the table stores.
    const BdmResult small = bdm_1d(BitSignal::parse("010101010101"), t, 4, 4);
    CHECK_FALSE(t.lookup(Pattern::line("0101")).fallback);
    CHECK(small.bits == t.lookup(Pattern::line("0101")).bits + std::log2(3.0));
    CHECK(small.fallback_windows == 0);
  }

  TEST_CASE("bdm_1d complement symmetry on random signals") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const BitSignal x = random_signal(64 + seed * 7, seed);
      REQUIRE(bdm_1d(x, table1d()).bits == bdm_1d(x.complement(), table1d()).bits);
      REQUIRE(bdm_1d(x, table1d(), 6, 3).bits == bdm_1d(x.complement(), table1d(), 6, 3).bits);
    }
  }

  TEST_CASE("bdm_2d") {
    const CtmTable& t = table2d();
    const double zero = t.lookup(Pattern::block("0000000000000000")).bits;
    const Grid g4 = random_grid(Shape::plane(4, 4), 3);
    const BdmResult one = bdm_2d(g4, t);
    CHECK(one.window_count == 1);
    std::string cells;
    for (Bit b : g4.cells()) cells += b ? '1' : '0';
    CHECK(one.bits == t.lookup(Pattern::block(cells)).bits);

    const BdmResult z = bdm_2d(Grid(Shape::plane(8, 8), 0), t);
    CHECK(z.window_count == 25);
    CHECK(z.distinct == 1);
    CHECK(z.bits == zero + std::log2(25.0));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Grid g = random_grid(Shape::plane(9 + seed % 5, 12 + seed % 3), seed);
      REQUIRE(bdm_2d(g, t).bits == bdm_2d(g.complement(), t).bits);
    }
    const BdmResult strided = bdm_2d(Grid(Shape::plane(8, 8), 0), t, 4);
    CHECK(strided.window_count == 4);
    CHECK_THROWS_AS(bdm_2d(Grid(Shape::plane(3, 8), 0), t), std::invalid_argument);
  }

  TEST_CASE("bdm_3d") {
    const CtmTable& t = table2d();
    const double zero = t.lookup(Pattern::block("0000000000000000")).bits;
    const BdmResult z = bdm_3d(Grid(Shape::volume(8, 8, 2), 0), t);
    CHECK(z.window_count == 50);
    CHECK(z.bits == 2 * (zero + std::log2(25.0)));

    const Grid v = random_grid(Shape::volume(6, 7, 4), 9);
    Grid reversed(v.shape());
    for (std::size_t p = 0; p < 4; ++p) {
      for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t c = 0; c < 7; ++c) reversed.at(r, c, p) = v.at(r, c, 3 - p);
      }
    }
    CHECK(bdm_3d(v, t).bits == bdm_3d(reversed, t).bits);
    const Grid single = random_grid(Shape::volume(6, 7, 1), 10);
    CHECK(bdm_3d(single, t).bits == bdm_2d(single.plane(0), t).bits);
  }

  TEST_CASE("reports") {
    const BitSignal x = random_signal(4096, 5);
    ReportParams p;
    const ComplexityReport r = report(x, &table1d(), p);
    CHECK(r.entropy.has_value());
    CHECK(r.block_entropy.has_value());
    CHECK(r.lzw_dict_len.has_value());
    CHECK(r.deflate_b64_len.has_value());
    CHECK(r.bdm.has_value());
    CHECK(r.normalized_deflate == static_cast<double>(*r.deflate_b64_len));

    ReportParams lossy;
    lossy.metrics = {Metric::deflate};
    lossy.original_bits = 4000;
    const BitSignal kept = x.prefix(3960);
    const ComplexityReport t = report(kept, nullptr, lossy);
    CHECK(*t.normalized_deflate == doctest::Approx(static_cast<double>(*t.deflate_b64_len) / 0.99));
    CHECK_FALSE(t.entropy.has_value());
    CHECK_THROWS_AS(report(x, nullptr, ReportParams{}), std::invalid_argument);

    const auto doc = nlohmann::json::parse(report_to_json(t));
    CHECK(doc["entropy"].is_null());
    CHECK(doc["deflate_b64_len"] == *t.deflate_b64_len);
    CHECK(report_csv_header() ==
          "bits,original_bits,entropy,block_entropy,block_entropy_len,lzw_dict_len,deflate_b64_len,"
          "normalized_deflate,bdm,normalized_bdm,bdm_windows,fallback_fraction");
  }

  TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
