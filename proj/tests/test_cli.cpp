#include <doctest.h>

#include <stdexcept>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "dimsig/ctm_table.hpp"
#include "test_paths.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = dimsig::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// A fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dimsig-test-" + tag + "-" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

json read_json(const std::string& path) { return json::parse(read_text(path)); }

// Keeps DIMSIG_TABLE from leaking in from the environment or between cases.
struct EnvGuard {
  explicit EnvGuard(const char* value = nullptr) {
    if (value) {
      setenv("DIMSIG_TABLE", value, 1);
    } else {
      unsetenv("DIMSIG_TABLE");
    }
  }
  ~EnvGuard() { unsetenv("DIMSIG_TABLE"); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage and data errors") {
    EnvGuard env;
    TempDir tmp("errors");
    CHECK(run({}).code == dimsig::cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == dimsig::cli::kExitUsage);
    CHECK(run({"ctm", "gen", "--states", "0", "-o", tmp / "g"}).code == dimsig::cli::kExitUsage);
    CHECK(run({"ctm", "gen", "--dims", "3", "-o", tmp / "g"}).code == dimsig::cli::kExitUsage);
    CHECK(run({"analyze", "-o", tmp / "a"}).code == dimsig::cli::kExitUsage);
    CHECK(run({"analyze", "-i", tmp / "missing.bits", "-o", tmp / "a"}).code == dimsig::cli::kExitData);
    CHECK(run({"infer", "--text", "hello world, this is text", "--ndims", "4", "-o", tmp / "a"}).code ==
          dimsig::cli::kExitUsage);
    CHECK(run({"analyze", "--text", "abc", "--table", tmp / "nope.ctm", "-o", tmp / "a"}).code ==
          dimsig::cli::kExitData);
    // A 2D table where a 1D one is needed.
    CHECK(run({"analyze", "--text", "abc", "--table", data_path("ctm2d_s2_t200.ctm"), "-o", tmp / "a"}).code ==
          dimsig::cli::kExitData);
    const auto bad = tmp / "bad.bits";
    std::ofstream(bad) << "0101x";
    CHECK(run({"analyze", "-i", bad, "--metrics", "entropy", "-o", tmp / "a"}).code == dimsig::cli::kExitData);
    CHECK(run({"--version"}).code == dimsig::cli::kExitOk);
  }

  TEST_CASE("ctm gen: one-state table, regenerated byte for byte") {
    TempDir tmp("gen");
    const Result a = run({"ctm", "gen", "--dims", "1", "--states", "1", "-o", tmp / "a"});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("machines 36") != std::string::npos);
    const Result b = run({"ctm", "gen", "--dims", "1", "--states", "1", "-o", tmp / "b", "--threads", "2"});
    REQUIRE(b.code == 0);
    const std::string text = read_text(tmp / "a/ctm1d_s1_t200.ctm");
    CHECK(text == read_text(tmp / "b/ctm1d_s1_t200.ctm"));
    const dimsig::CtmTable t = dimsig::parse_table(text);
    CHECK(t.space().states == 1);
    CHECK(t.total_machines() == 72);
    const json m = read_json(tmp / "a/manifest.json");
    CHECK(m["command"] == json::array({"ctm", "gen"}));
    CHECK(m["params"]["states"] == 1);
    CHECK(m["outputs"].contains("ctm1d_s1_t200.ctm"));
  }

  TEST_CASE("encode and analyze") {
    EnvGuard env;
    TempDir tmp("analyze");
    const Result e = run({"encode", "--text", "Hi", "-o", tmp / "e"});
    REQUIRE(e.code == 0);
    CHECK(read_text(tmp / "e/signal.bits") == "0100100001101001\n");

    const Result a = run({"analyze", "-i", fixture_path("random402.bits"), "-o", tmp / "a"});
    REQUIRE(a.code == 0);
    const json r = read_json(tmp / "a/report.json");
    CHECK(r["bits"] == 402);
    CHECK(r["entropy"] == 1.0);
    CHECK(r["bdm"].is_number());
    const json m = read_json(tmp / "a/manifest.json");
    CHECK(m["tool"] == "dimsig");
    CHECK(m["input"]["path"] == fs::absolute(fixture_path("random402.bits")).lexically_normal().string());
    CHECK(m["input"]["sha256"].get<std::string>().size() == 64);
    CHECK(m["table"]["path"].get<std::string>().find("ctm1d_s3_t200.ctm") != std::string::npos);
    CHECK(m["params"].contains("metrics"));
    CHECK(m["params"].contains("bdm-block"));
    CHECK(m["outputs"].contains("report.json"));
    CHECK(m["outputs"].contains("report.csv"));
  }

  TEST_CASE("table resolution through DIMSIG_TABLE") {
    TempDir tmp("env");
    const std::string dir = tmp / "tables";
    fs::create_directories(dir);
    REQUIRE(run({"ctm", "gen", "--dims", "1", "--states", "1", "-o", dir}).code == 0);
    const std::string one_state = dir + "/ctm1d_s1_t200.ctm";
    {
      EnvGuard env(one_state.c_str());
      REQUIRE(run({"analyze", "--text", "abc", "--metrics", "bdm", "-o", tmp / "a"}).code == 0);
      CHECK(read_json(tmp / "a/manifest.json")["table"]["states"] == 1);
      // --table wins over the environment.
      REQUIRE(run({"analyze", "--text", "abc", "--metrics", "bdm", "--table", data_path("ctm1d_s3_t200.ctm"), "-o",
                   tmp / "b"})
                  .code == 0);
      CHECK(read_json(tmp / "b/manifest.json")["table"]["states"] == 3);
    }
    {
      EnvGuard env(DIMSIG_DATA_DIR);
      REQUIRE(run({"analyze", "--text", "abc", "--metrics", "bdm", "-o", tmp / "c"}).code == 0);
      CHECK(read_json(tmp / "c/manifest.json")["table"]["states"] == 3);
    }
    {
      EnvGuard env((tmp / "nothing-here").c_str());
      CHECK(run({"analyze", "--text", "abc", "--metrics", "bdm", "-o", tmp / "d"}).code == dimsig::cli::kExitData);
      // No table is needed without BDM.
      CHECK(run({"analyze", "--text", "abc", "--metrics", "entropy", "-o", tmp / "d"}).code == 0);
    }
  }

  TEST_CASE("perturb replays identically with a different thread count") {
    EnvGuard env;
    TempDir tmp("replay");
    const Result p = run({"perturb", "-i", fixture_path("darwin_402.txt"), "--schedule", "0:402:67", "--trials", "32",
                          "--seed", "5", "--svg", "--threads", "1", "-o", tmp / "p"});
    REQUIRE(p.code == 0);
    const json m = read_json(tmp / "p/manifest.json");
    CHECK(m["params"]["trials"] == 32);
    CHECK(m["params"]["seed"] == 5);
    CHECK(m["params"]["svg"] == true);
    CHECK(m["outputs"].contains("perturb_bdm.svg"));

    const Result r = run({"replay", tmp / "p/manifest.json", "--threads", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("MISMATCH") == std::string::npos);
    CHECK(r.out.find("match    perturb.csv") != std::string::npos);
    CHECK(read_text(tmp / "p/perturb.csv") == read_text(tmp / "p/replay/perturb.csv"));

    // A manifest whose recorded digest disagrees is reported.
    json tampered = m;
    tampered["outputs"]["perturb.csv"] = std::string(64, '0');
    std::ofstream(tmp / "p/tampered.json") << tampered.dump(2);
    const Result bad = run({"replay", tmp / "p/tampered.json", "-o", tmp / "q"});
    CHECK(bad.code == dimsig::cli::kExitData);
    CHECK(bad.out.find("MISMATCH perturb.csv") != std::string::npos);

    // Changing the input invalidates the manifest.
    const std::string input = tmp / "input.txt";
    std::ofstream(input) << "some text that will change";
    REQUIRE(run({"analyze", "-i", input, "--metrics", "entropy", "-o", tmp / "x"}).code == 0);
    std::ofstream(input) << "different text";
    CHECK(run({"replay", tmp / "x/manifest.json"}).code == dimsig::cli::kExitData);
  }

  TEST_CASE("plots carry their data") {
    EnvGuard env;
    TempDir tmp("svg");
    REQUIRE(run({"perturb", "-i", fixture_path("random402.bits"), "--schedule", "0,402", "--trials", "8", "--metrics",
                 "entropy", "--svg", "-o", tmp / "p"})
                .code == 0);
    const std::string svg = read_text(tmp / "p/perturb_entropy.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    // Flipping every bit of a balanced signal keeps it balanced.
    CHECK(svg.find("data-x=\"0\" data-min=\"1\"") != std::string::npos);
    CHECK(svg.find("data-x=\"402\" data-min=\"1\"") != std::string::npos);

    REQUIRE(run({"sweep", "-i", fixture_path("stripes_32x64.bits"), "--svg", "--radar", "-o", tmp / "s"}).code == 0);
    const std::string line = read_text(tmp / "s/sweep.svg");
    const std::string radar = read_text(tmp / "s/radar.svg");
    CHECK(line.find("data-name=\"bdm\"") != std::string::npos);
    CHECK(radar.find("data-kind=\"radar\"") != std::string::npos);
    CHECK(read_json(tmp / "s/manifest.json")["outputs"].contains("radar.svg"));

    // Plots do not alter the data files.
    REQUIRE(run({"sweep", "-i", fixture_path("stripes_32x64.bits"), "-o", tmp / "t"}).code == 0);
    CHECK(read_text(tmp / "s/landscape.csv") == read_text(tmp / "t/landscape.csv"));
    CHECK(read_text(tmp / "s/spikes.json") == read_text(tmp / "t/spikes.json"));
  }

  TEST_CASE("infer on the stripe fixture") {
    EnvGuard env;
    TempDir tmp("infer");
    const Result r = run({"infer", "-i", fixture_path("stripes_32x64.bits"), "--ndims", "2", "-o", tmp / "i"});
    REQUIRE(r.code == 0);
    const json doc = read_json(tmp / "i/infer.json");
    bool found = false;
    for (const auto& c : doc["candidates"]) found |= c["m"] == 32 && c["n"] == 64;
    CHECK(found);
    CHECK(doc["candidates"].size() <= 3);
    CHECK(doc["weak"] == false);
  }

  TEST_CASE("reconstruct writes one bitmap per variant") {
    EnvGuard env;
    TempDir tmp("recon");
    const Result r = run({"reconstruct", "-i", fixture_path("stripes_32x64.bits"), "--shape", "32x64", "-o", tmp / "r"});
    REQUIRE(r.code == 0);
    const json doc = read_json(tmp / "r/reconstruct.json");
    REQUIRE(doc["variants"].size() == 4);
    for (int i = 1; i <= 4; ++i) {
      const std::string pbm = read_text(tmp / ("r/v" + std::to_string(i) + "_p0.pbm"));
      CHECK(pbm.rfind("P1\n64 32\n", 0) == 0);
    }
    CHECK(run({"reconstruct", "-i", fixture_path("stripes_32x64.bits"), "--shape", "64x64", "-o", tmp / "r"}).code ==
          dimsig::cli::kExitUsage);
    CHECK(run({"reconstruct", "-i", fixture_path("stripes_32x64.bits"), "--shape", "ax3", "-o", tmp / "r"}).code ==
          dimsig::cli::kExitUsage);
  }

  TEST_CASE("scramble outputs") {
    EnvGuard env;
    TempDir tmp("scramble");
    const Result r = run({"scramble", "-i", fixture_path("repetitive_640.txt"), "--trials", "50", "--svg", "-o",
                          tmp / "s"});
    REQUIRE(r.code == 0);
    const json doc = read_json(tmp / "s/scramble.json");
    CHECK(doc["trials"] == 50);
    const std::string svg = read_text(tmp / "s/scramble.svg");
    CHECK(svg.find("data-count=") != std::string::npos);
    CHECK(std::regex_search(svg, std::regex("data-value=\"[0-9.e+-]+\"")));
  }
}
