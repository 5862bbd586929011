#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "dimsig/complexity.hpp"
#include "dimsig/ctm_table.hpp"
#include "dimsig/encodings.hpp"
#include "dimsig/error.hpp"
#include "dimsig/landscape.hpp"
#include "dimsig/perturbation.hpp"
#include "dimsig/reconstruct.hpp"
#include "svg.hpp"

#ifndef DIMSIG_DATA_DIR
#define DIMSIG_DATA_DIR "data"
#endif

namespace dimsig::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kDefaultTable1d = "ctm1d_s3_t200.ctm";
constexpr const char* kDefaultTable2d = "ctm2d_s2_t200.ctm";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join(const std::vector<std::string>& parts, const std::string& sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::size_t parse_count(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || s.front() == '-') {
    throw UsageError(std::string("bad ") + what + " '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

// "RxC" or "RxCxP".
Shape parse_shape(const std::string& text) {
  const auto parts = split(text, 'x');
  if (parts.size() == 2) return Shape::plane(parse_count(parts[0], "shape"), parse_count(parts[1], "shape"));
  if (parts.size() == 3) {
    return Shape::volume(parse_count(parts[0], "shape"), parse_count(parts[1], "shape"),
                         parse_count(parts[2], "shape"));
  }
  throw UsageError("shape must look like 32x64 or 16x16x16, got '" + text + "'");
}

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<Metric> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_metric(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no metrics selected");
  return out;
}

std::vector<std::string> metric_names(const std::vector<Metric>& metrics) {
  std::vector<std::string> out;
  for (Metric m : metrics) out.emplace_back(metric_name(m));
  return out;
}

json stats_json(const Stats& s) {
  return json{{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}, {"mean", s.mean}};
}

json shape_json(const Shape& s) {
  json j{{"rows", s.rows}, {"cols", s.cols}};
  if (s.rank == 3) j["planes"] = s.planes;
  return j;
}

// Options shared by every command that reads a signal.
struct Common {
  std::string input;
  std::string text;
  std::string scheme = "utf8";
  std::string table;
  std::string out = "dimsig-out";
  unsigned threads = 0;
};

void add_input_options(CLI::App* cmd, Common& c) {
  cmd->add_option("-i,--input", c.input,
                  "Input file: .bits (0/1 text), .txt (encoded with --scheme) or anything else as raw bytes");
  cmd->add_option("--text", c.text, "Inline text, encoded with --scheme");
  cmd->add_option("--scheme", c.scheme, "Text encoding: utf8|balanced|vowel|space|set:<chars>")
      ->capture_default_str();
}

void add_output_options(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_table_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--table", c.table, "CTM table file (default: $DIMSIG_TABLE, then the bundled table)");
}

struct LoadedInput {
  BitSignal bits;
  json info;    // goes to the manifest
  json params;  // effective input flags, for replay
};

EncodingScheme scheme_of(const std::string& name) {
  try {
    return EncodingScheme::parse(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

BitSignal encode_text(const std::string& text, const EncodingScheme& scheme) {
  try {
    return encode(text, scheme);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

LoadedInput load_input(const Common& c) {
  if (c.input.empty() == c.text.empty()) throw UsageError("give exactly one of --input or --text");
  LoadedInput in;
  if (!c.text.empty()) {
    const EncodingScheme scheme = scheme_of(c.scheme);
    in.bits = encode_text(c.text, scheme);
    in.info = {{"format", "text"}, {"scheme", scheme.name()}, {"chars", c.text.size()}};
    in.params = {{"text", c.text}, {"scheme", c.scheme}};
  } else {
    const fs::path path = fs::absolute(c.input).lexically_normal();
    std::string content = read_file(path);
    const std::string digest = sha256_hex(content);
    const std::string ext = path.extension().string();
    in.params = {{"input", path.string()}};
    if (ext == ".bits") {
      try {
        in.bits = BitSignal::parse(content);
      } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
      }
      in.info = {{"format", "bits"}};
    } else if (ext == ".txt") {
      // A single trailing line break is an artifact of the file, not text.
      if (!content.empty() && content.back() == '\n') content.pop_back();
      if (!content.empty() && content.back() == '\r') content.pop_back();
      const EncodingScheme scheme = scheme_of(c.scheme);
      in.bits = encode_text(content, scheme);
      in.info = {{"format", "text"}, {"scheme", scheme.name()}, {"chars", content.size()}};
      in.params["scheme"] = c.scheme;
    } else {
      const auto* p = reinterpret_cast<const std::uint8_t*>(content.data());
      in.bits = BitSignal::from_bytes({p, content.size()});
      in.info = {{"format", "bytes"}};
    }
    in.info["path"] = path.string();
    in.info["sha256"] = digest;
  }
  if (in.bits.empty()) throw DataError("input signal is empty");
  in.info["bits"] = in.bits.size();
  in.info["ones"] = in.bits.ones();
  return in;
}

struct LoadedTable {
  std::optional<CtmTable> table;
  json info = nullptr;
  std::string path;
};

LoadedTable load_table_for(const Common& c, int dims) {
  const char* name = dims == 1 ? kDefaultTable1d : kDefaultTable2d;
  fs::path path;
  if (!c.table.empty()) {
    path = c.table;
  } else if (const char* env = std::getenv("DIMSIG_TABLE"); env && *env) {
    path = env;
    if (fs::is_directory(path)) path /= name;
  } else {
    path = fs::path(DIMSIG_DATA_DIR) / name;
  }
  path = fs::absolute(path).lexically_normal();
  if (!fs::is_regular_file(path)) throw DataError("CTM table not found: " + path.string());
  const std::string content = read_file(path);
  LoadedTable t;
  t.table = parse_table(content);
  if (t.table->dims() != dims) {
    throw DataError("CTM table " + path.string() + " is " + std::to_string(t.table->dims()) +
                    "D, this command needs a " + std::to_string(dims) + "D table");
  }
  t.path = path.string();
  t.info = {{"path", t.path},
            {"sha256", sha256_hex(content)},
            {"dims", t.table->dims()},
            {"states", t.table->space().states},
            {"max_steps", t.table->space().max_steps},
            {"entries", t.table->size()}};
  return t;
}

// Collects output files and their digests, then writes the manifest.
class Run {
 public:
  Run(std::vector<std::string> command, const Common& c) : command_(std::move(command)), threads_(c.threads) {
    dir_ = c.out;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw DataError("cannot create output directory " + dir_.string());
  }

  json params = json::object();
  json input = nullptr;
  json table = nullptr;

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("cannot write " + path.string());
    outputs_[name] = sha256_hex(content);
  }

  void finish() {
    json m;
    m["tool"] = "dimsig";
    m["version"] = kVersion;
    m["command"] = command_;
    m["params"] = params;
    m["input"] = input;
    m["table"] = table;
    m["threads"] = threads_;
    json outs = json::object();
    for (const auto& [name, digest] : outputs_) outs[name] = digest;
    m["outputs"] = outs;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << m.dump(2) << "\n";
    if (!out) throw DataError("cannot write " + path.string());
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::vector<std::string> command_;
  unsigned threads_;
  fs::path dir_;
  std::map<std::string, std::string> outputs_;
};

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

// ---- ctm gen ---------------------------------------------------------------

struct GenOptions {
  int dims = 1;
  std::optional<int> states;
  int max_steps = 200;
  std::string out = "dimsig-out";
  unsigned threads = 0;
};

int cmd_ctm_gen(const GenOptions& o, std::ostream& out) {
  MachineSpace space = o.dims == 2 ? MachineSpace::default_2d() : MachineSpace::default_1d();
  space.dims = o.dims;
  if (o.states) space.states = *o.states;
  space.max_steps = o.max_steps;
  space.validate();

  Common c;
  c.out = o.out;
  c.threads = o.threads;
  Run run({"ctm", "gen"}, c);
  run.params = {{"dims", space.dims}, {"states", space.states}, {"max-steps", space.max_steps}};
  BuildStats stats;
  const CtmTable table = build_table(space, o.threads, &stats);
  const std::string name = "ctm" + std::to_string(space.dims) + "d_s" + std::to_string(space.states) + "_t" +
                           std::to_string(space.max_steps) + ".ctm";
  run.write(name, serialize_table(table));
  run.finish();
  out << "machines " << stats.machines << " (runs " << table.total_machines() << ")\n"
      << "halting " << stats.halting << " (fraction " << format_double(static_cast<double>(stats.halting) /
                                                                        static_cast<double>(stats.machines))
      << ")\n"
      << "discarded " << stats.discarded << "\n"
      << "nonhalting " << stats.nonhalting << "\n"
      << "entries " << table.size() << "\n"
      << "wrote " << (run.dir() / name).string() << "\n";
  return kExitOk;
}

// ---- encode ----------------------------------------------------------------

int cmd_encode(const Common& c, std::ostream& out) {
  Run run({"encode"}, c);
  const LoadedInput in = load_input(c);
  run.params = in.params;
  run.input = in.info;
  run.write("signal.bits", in.bits.to_string() + "\n");
  const json summary{{"bits", in.bits.size()}, {"ones", in.bits.ones()}, {"ones_fraction", in.bits.ones_fraction()}};
  json doc = in.info;
  doc.erase("path");
  doc.erase("sha256");
  merge(doc, summary);
  run.write("encode.json", doc.dump(2) + "\n");
  run.finish();
  out << in.bits.size() << " bits, " << in.bits.ones() << " ones (" << format_double(in.bits.ones_fraction())
      << ")\n";
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeOptions {
  std::vector<std::string> metrics{"entropy", "block_entropy", "lzw", "deflate", "bdm"};
  std::size_t block_entropy_len = 8;
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  std::string shape;
};

int cmd_analyze(const Common& c, const AnalyzeOptions& o, std::ostream& out) {
  Run run({"analyze"}, c);
  const LoadedInput in = load_input(c);
  ReportParams rp;
  rp.metrics = parse_metrics(o.metrics);
  rp.block_entropy_len = o.block_entropy_len;
  rp.bdm_block = o.bdm_block;
  rp.bdm_stride = o.bdm_stride;
  rp.original_bits = in.bits.size();

  std::optional<Shape> shape;
  if (!o.shape.empty()) shape = parse_shape(o.shape);
  LoadedTable t;
  if (rp.wants(Metric::bdm)) t = load_table_for(c, shape ? 2 : 1);

  run.params = in.params;
  run.params["metrics"] = metric_names(rp.metrics);
  run.params["block-entropy-len"] = rp.block_entropy_len;
  run.params["bdm-block"] = rp.bdm_block;
  run.params["bdm-stride"] = rp.bdm_stride;
  if (shape) run.params["shape"] = o.shape;
  if (t.table) run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const CtmTable* table = t.table ? &*t.table : nullptr;
  const ComplexityReport r = shape ? report(reshape(in.bits, *shape), table, rp) : report(in.bits, table, rp);
  const std::string report_json = report_to_json(r);
  run.write("report.json", report_json + "\n");
  run.write("report.csv", report_csv_header() + "\n" + report_csv_row(r) + "\n");
  run.finish();
  out << report_json << "\n";
  return kExitOk;
}

// ---- perturb ---------------------------------------------------------------

struct PerturbOptions {
  std::string schedule = "default";
  std::size_t points = 32;
  std::size_t trials = 1024;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics{"entropy", "lzw", "bdm", "deflate"};
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  bool svg = false;
};

std::vector<std::size_t> resolve_schedule(const std::string& spec, std::size_t points, std::size_t s) {
  if (spec == "default") return default_schedule(s, points);
  if (spec.find(':') != std::string::npos) return parse_schedule(spec, s);
  std::vector<std::size_t> out;
  for (const auto& part : split(spec, ',')) out.push_back(parse_count(part, "schedule entry"));
  return out;
}

int cmd_perturb(const Common& c, const PerturbOptions& o, std::ostream& out) {
  Run run({"perturb"}, c);
  const LoadedInput in = load_input(c);
  FlipExperimentPlan plan;
  plan.schedule = resolve_schedule(o.schedule, o.points, in.bits.size());
  plan.trials_per_k = o.trials;
  plan.master_seed = o.seed;
  plan.metrics = parse_metrics(o.metrics);
  plan.bdm_block = o.bdm_block;
  plan.bdm_stride = o.bdm_stride;
  plan.threads = c.threads;
  plan.validate(in.bits.size());

  LoadedTable t;
  if (std::find(plan.metrics.begin(), plan.metrics.end(), Metric::bdm) != plan.metrics.end()) {
    t = load_table_for(c, 1);
  }
  run.params = in.params;
  run.params["schedule"] = o.schedule;
  run.params["points"] = o.points;
  run.params["trials"] = o.trials;
  run.params["seed"] = o.seed;
  run.params["metrics"] = metric_names(plan.metrics);
  run.params["bdm-block"] = o.bdm_block;
  run.params["bdm-stride"] = o.bdm_stride;
  run.params["svg"] = o.svg;
  if (t.table) run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const auto rows = run_flip_experiment(in.bits, plan, t.table ? &*t.table : nullptr);
  run.write("perturb.csv", trial_summaries_csv(rows));
  if (o.svg) {
    for (Metric m : plan.metrics) {
      std::vector<plot::Box> boxes;
      for (const auto& row : rows) boxes.push_back({static_cast<double>(row.k), row.at(m)});
      const std::string name(metric_name(m));
      run.write("perturb_" + name + ".svg",
                plot::box_chart(name + " under random bit flips", "flipped bits k", name, boxes));
    }
  }
  run.finish();
  out << "wrote " << rows.size() << " schedule points x " << plan.metrics.size() << " metrics to "
      << (run.dir() / "perturb.csv").string() << "\n";
  return kExitOk;
}

// ---- scramble --------------------------------------------------------------

struct ScrambleOptions {
  std::size_t segment_width = 64;
  std::vector<std::size_t> boundaries;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::string metric = "deflate";
  std::size_t bins = 20;
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  bool svg = false;
};

int cmd_scramble(const Common& c, const ScrambleOptions& o, std::ostream& out) {
  Run run({"scramble"}, c);
  const LoadedInput in = load_input(c);
  const std::size_t s = in.bits.size();
  const std::vector<std::size_t> cuts = o.boundaries.empty() ? uniform_boundaries(s, o.segment_width) : o.boundaries;
  ScrambleParams sp;
  sp.trials = o.trials;
  sp.master_seed = o.seed;
  sp.metric = parse_metrics({o.metric}).front();
  sp.histogram_bins = o.bins;
  sp.bdm_block = o.bdm_block;
  sp.bdm_stride = o.bdm_stride;
  sp.threads = c.threads;
  LoadedTable t;
  if (sp.metric == Metric::bdm) t = load_table_for(c, 1);

  run.params = in.params;
  if (o.boundaries.empty()) {
    run.params["segment-width"] = o.segment_width;
  } else {
    std::vector<std::string> b;
    for (auto v : o.boundaries) b.push_back(std::to_string(v));
    run.params["boundaries"] = b;
  }
  run.params["trials"] = o.trials;
  run.params["seed"] = o.seed;
  run.params["metric"] = std::string(metric_name(sp.metric));
  run.params["bins"] = o.bins;
  run.params["bdm-block"] = o.bdm_block;
  run.params["bdm-stride"] = o.bdm_stride;
  run.params["svg"] = o.svg;
  if (t.table) run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const ScrambleResult r = scramble_experiment(in.bits, cuts, sp, t.table ? &*t.table : nullptr);
  const DescriptionLength dl = scramble_description(s, cuts);
  json doc;
  doc["metric"] = std::string(metric_name(sp.metric));
  doc["bits"] = s;
  doc["segments"] = segments_from_boundaries(s, cuts).size();
  doc["trials"] = sp.trials;
  doc["original"] = r.original;
  doc["fraction_le"] = r.fraction_le;
  doc["percentile"] = r.percentile;
  doc["stats"] = stats_json(r.stats);
  doc["change_histogram"] = {{"lo", r.change_histogram.lo},
                             {"width", r.change_histogram.width},
                             {"counts", r.change_histogram.counts}};
  doc["description_length"] = {{"header_bits", dl.header_bits}, {"index_bits", dl.index_bits}, {"total", dl.total()}};
  run.write("scramble.json", doc.dump(2) + "\n");
  std::string csv = "trial,value\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) csv += std::to_string(i) + "," + format_double(r.values[i]) + "\n";
  run.write("scramble.csv", csv);
  if (o.svg) {
    std::vector<plot::Bar> bars;
    const auto& h = r.change_histogram;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      bars.push_back({h.lo + h.width * static_cast<double>(i), h.lo + h.width * static_cast<double>(i + 1),
                      static_cast<double>(h.counts[i])});
    }
    run.write("scramble.svg", plot::histogram_chart("Change in " + std::string(metric_name(sp.metric)) +
                                                        " after segment scrambling",
                                                    "scrambled - original", bars, 0.0));
  }
  run.finish();
  out << "original " << format_double(r.original) << ", scrambled median " << format_double(r.stats.median)
      << ", fraction <= original " << format_double(r.fraction_le) << ", percentile "
      << format_double(r.percentile) << "\n";
  return kExitOk;
}

// ---- sweep / infer ---------------------------------------------------------

struct SweepOptions {
  double loss = 0.01;
  std::size_t window = 9;
  double threshold = 2.5;
  double mad_floor = 0.02;
  bool svg = false;
  bool radar = false;
  int ndims = 2;
  std::size_t top_k = 3;
};

SpikeParams spike_params(const SweepOptions& o) {
  return SpikeParams{o.window, o.threshold, o.mad_floor};
}

void spike_flags(json& params, const SweepOptions& o) {
  params["loss"] = o.loss;
  params["window"] = o.window;
  params["threshold"] = o.threshold;
  params["mad-floor"] = o.mad_floor;
}

json candidate_json(const SpikeCandidate& c, const Landscape& land) {
  const LandscapePoint& pt = land.points[c.point_index];
  return json{{"rank", c.rank},
              {"m", c.partition.shape.rows},
              {"n", c.partition.shape.cols},
              {"p", c.partition.shape.planes},
              {"kept_bits", c.partition.kept_bits},
              {"loss", c.partition.loss_fraction},
              {"value", c.value},
              {"z", c.depth},
              {"bdm_norm", pt.bdm_norm ? json(*pt.bdm_norm) : json(nullptr)}};
}

std::string sweep_line_svg(const Landscape& land) {
  plot::Series bdm{"bdm", {}}, entropy{"block entropy", {}}, deflate{"deflate", {}};
  for (const auto& pt : land.points) {
    const double m = static_cast<double>(pt.partition.shape.rows);
    if (pt.bdm_scaled) bdm.points.emplace_back(m, *pt.bdm_scaled);
    entropy.points.emplace_back(m, pt.entropy_scaled);
    deflate.points.emplace_back(m, pt.deflate_scaled);
  }
  return plot::line_chart("Structural perturbation landscape", "rows m of the m x n partition", "scaled value",
                          {bdm, entropy, deflate});
}

std::string sweep_radar_svg(const Landscape& land) {
  std::vector<std::string> spokes;
  plot::RadarSeries bdm{"bdm", {}}, entropy{"block entropy", {}}, deflate{"deflate", {}};
  for (const auto& pt : land.points) {
    if (!pt.bdm_scaled) continue;
    spokes.push_back(std::to_string(pt.partition.shape.rows));
    bdm.values.push_back(*pt.bdm_scaled);
    entropy.values.push_back(pt.entropy_scaled);
    deflate.values.push_back(pt.deflate_scaled);
  }
  return plot::radar_chart("Structural perturbation (ticks: m)", spokes, {bdm, entropy, deflate});
}

int cmd_sweep(const Common& c, const SweepOptions& o, std::ostream& out) {
  Run run({"sweep"}, c);
  const LoadedInput in = load_input(c);
  LoadedTable t = load_table_for(c, 2);
  run.params = in.params;
  spike_flags(run.params, o);
  run.params["svg"] = o.svg;
  run.params["radar"] = o.radar;
  run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const SpikeParams sp = spike_params(o);
  const Landscape land = structural_sweep(in.bits, o.loss, *t.table, sp, c.threads);
  run.write("landscape.csv", landscape_csv(land));
  json spikes = json::object();
  std::size_t bdm_spikes = 0;
  for (Metric m : {Metric::bdm, Metric::block_entropy, Metric::deflate}) {
    json list = json::array();
    if (land.raw_series(m).size() >= sp.window) {
      const auto found = detect_spikes(land, m, sp);
      if (m == Metric::bdm) bdm_spikes = found.size();
      for (const auto& cand : found) list.push_back(candidate_json(cand, land));
    }
    spikes[std::string(metric_name(m))] = list;
  }
  run.write("spikes.json", spikes.dump(2) + "\n");
  if (o.svg) run.write("sweep.svg", sweep_line_svg(land));
  if (o.radar) run.write("radar.svg", sweep_radar_svg(land));
  run.finish();
  out << land.points.size() << " partitions, " << bdm_spikes << " BDM spikes\n";
  return kExitOk;
}

int cmd_infer(const Common& c, const SweepOptions& o, std::ostream& out) {
  if (o.ndims != 2 && o.ndims != 3) throw UsageError("--ndims must be 2 or 3");
  Run run({"infer"}, c);
  const LoadedInput in = load_input(c);
  LoadedTable t = load_table_for(c, 2);
  run.params = in.params;
  run.params["ndims"] = o.ndims;
  run.params["top-k"] = o.top_k;
  spike_flags(run.params, o);
  run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const SpikeParams sp = spike_params(o);
  json doc;
  doc["ndims"] = o.ndims;
  doc["bits"] = in.bits.size();
  if (o.ndims == 2) {
    const Inference2d inf = infer_dims_2d(in.bits, o.loss, *t.table, o.top_k, sp, c.threads);
    doc["weak"] = inf.weak;
    json list = json::array();
    for (const auto& cand : inf.ranked) list.push_back(candidate_json(cand, inf.landscape));
    doc["candidates"] = list;
    run.write("landscape.csv", landscape_csv(inf.landscape));
    for (const auto& cand : inf.ranked) {
      out << cand.rank << ": " << cand.partition.shape.to_string() << (inf.weak ? " (weak)" : "") << "\n";
    }
  } else {
    const Inference3d inf = infer_dims_3d(in.bits, o.loss, *t.table, o.top_k, sp, c.threads);
    json stage1;
    stage1["weak"] = inf.stage1.weak;
    json spikes = json::array();
    for (const auto& cand : inf.stage1.ranked) spikes.push_back(candidate_json(cand, inf.stage1.landscape));
    stage1["candidates"] = spikes;
    stage1["heads"] = inf.stage1_heads;
    doc["stage1"] = stage1;
    json list = json::array();
    std::size_t rank = 0;
    for (const auto& tc : inf.ranked) {
      list.push_back(json{{"rank", ++rank},
                          {"m", tc.shape.rows},
                          {"n", tc.shape.cols},
                          {"p", tc.shape.planes},
                          {"stage1_value", tc.stage1_value},
                          {"stage2_value", tc.stage2_value},
                          {"stage1_family", tc.stage1_family},
                          {"weak", tc.weak}});
      out << rank << ": " << tc.shape.to_string() << (tc.weak ? " (weak)" : "") << "\n";
    }
    doc["candidates"] = list;
    run.write("landscape.csv", landscape_csv(inf.stage1.landscape));
  }
  run.write("infer.json", doc.dump(2) + "\n");
  run.finish();
  return kExitOk;
}

// ---- reconstruct -----------------------------------------------------------

int cmd_reconstruct(const Common& c, const std::string& shape_text, std::ostream& out) {
  Run run({"reconstruct"}, c);
  const LoadedInput in = load_input(c);
  const Shape shape = parse_shape(shape_text);
  LoadedTable t = load_table_for(c, 2);
  run.params = in.params;
  run.params["shape"] = shape_text;
  run.params["table"] = t.path;
  run.input = in.info;
  run.table = t.info;

  const Grid grid = reshape(in.bits, shape);
  const auto variants = orientation_candidates(grid, *t.table);
  json doc;
  doc["dims"] = shape_json(shape);
  doc["kept_bits"] = shape.cells();
  json list = json::array();
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    json files = json::array();
    for (std::size_t p = 0; p < v.grid.planes(); ++p) {
      const std::string name = "v" + std::to_string(i + 1) + "_p" + std::to_string(p) + ".pbm";
      run.write(name, to_pbm(v.grid, p));
      files.push_back(name);
    }
    json flips{{"rows", v.flips[0]}, {"cols", v.flips[1]}};
    if (shape.rank == 3) flips["planes"] = v.flips[2];
    list.push_back(json{{"rank", i + 1}, {"flips", flips}, {"score", v.score}, {"files", files}});
    out << i + 1 << ": flips rows=" << v.flips[0] << " cols=" << v.flips[1];
    if (shape.rank == 3) out << " planes=" << v.flips[2];
    out << " score " << format_double(v.score) << "\n";
  }
  doc["variants"] = list;
  run.write("reconstruct.json", doc.dump(2) + "\n");
  run.finish();
  return kExitOk;
}

// ---- replay ----------------------------------------------------------------

std::string flag_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(flag_value(e));
    return join(parts);
  }
  return v.dump();
}

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::optional<unsigned> threads,
               std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  if (!m.contains("command") || !m.contains("params") || !m.contains("outputs")) {
    throw DataError(manifest_path + ": not a dimsig manifest");
  }
  if (m["input"].is_object() && m["input"].contains("sha256")) {
    const std::string path = m["input"]["path"];
    if (sha256_hex(read_file(path)) != m["input"]["sha256"]) throw DataError("input changed since the run: " + path);
  }
  if (m["table"].is_object()) {
    const std::string path = m["table"]["path"];
    if (sha256_hex(read_file(path)) != m["table"]["sha256"]) throw DataError("table changed since the run: " + path);
  }

  const fs::path dir = out_dir.empty() ? fs::path(manifest_path).parent_path() / "replay" : fs::path(out_dir);
  std::vector<std::string> args = m["command"].get<std::vector<std::string>>();
  for (const auto& [key, value] : m["params"].items()) {
    if (value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(flag_value(value));
  }
  args.push_back("--out");
  args.push_back(dir.string());
  args.push_back("--threads");
  args.push_back(std::to_string(threads.value_or(m.value("threads", 0u))));

  std::ostringstream sink;
  const int code = run(args, sink, err);
  if (code != kExitOk) return code;

  bool same = true;
  for (const auto& [name, digest] : m["outputs"].items()) {
    const fs::path produced = dir / name;
    const bool ok = fs::is_regular_file(produced) && sha256_hex(read_file(produced)) == digest.get<std::string>();
    out << (ok ? "match    " : "MISMATCH ") << name << "\n";
    same = same && ok;
  }
  out << (same ? "replay reproduced every output\n" : "replay differs\n");
  return same ? kExitOk : kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dimsig: information content and dimension inference for flat binary signals", "dimsig"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::string manifest_path;

  auto* ctm = app.add_subcommand("ctm", "CTM table tools");
  ctm->require_subcommand(1);
  GenOptions gen;
  auto* gen_cmd = ctm->add_subcommand("gen", "Enumerate a machine space and write its CTM table");
  gen_cmd->add_option("--dims", gen.dims, "1 (Turing machines) or 2 (turmites)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  gen_cmd->add_option("--states", gen.states, "Number of states (default 3 for 1D, 2 for 2D)");
  gen_cmd->add_option("--max-steps", gen.max_steps, "Step budget per machine")->capture_default_str();
  gen_cmd->add_option("-o,--out", gen.out, "Output directory")->capture_default_str();
  gen_cmd->add_option("--threads", gen.threads, "Worker threads (0 = all cores)")->capture_default_str();

  auto* encode_cmd = app.add_subcommand("encode", "Binarize an input and write it as .bits");
  add_input_options(encode_cmd, common);
  add_output_options(encode_cmd, common);

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute information-content metrics");
  add_input_options(analyze_cmd, common);
  add_output_options(analyze_cmd, common);
  add_table_option(analyze_cmd, common);
  analyze_cmd->add_option("--metrics", analyze.metrics, "entropy,block_entropy,lzw,deflate,bdm")
      ->delimiter(',')
      ->capture_default_str();
  analyze_cmd->add_option("--block-entropy-len", analyze.block_entropy_len)->capture_default_str();
  analyze_cmd->add_option("--bdm-block", analyze.bdm_block)->capture_default_str();
  analyze_cmd->add_option("--bdm-stride", analyze.bdm_stride)->capture_default_str();
  analyze_cmd->add_option("--shape", analyze.shape, "Measure as a grid, e.g. 32x64 or 16x16x16");

  PerturbOptions perturb;
  auto* perturb_cmd = app.add_subcommand("perturb", "Random bit-flip experiment over a schedule of k");
  add_input_options(perturb_cmd, common);
  add_output_options(perturb_cmd, common);
  add_table_option(perturb_cmd, common);
  perturb_cmd->add_option("--schedule", perturb.schedule, "default | start:stop:step | k1,k2,...")
      ->capture_default_str();
  perturb_cmd->add_option("--points", perturb.points, "Points of the default schedule")->capture_default_str();
  perturb_cmd->add_option("--trials", perturb.trials, "Trials per k")->capture_default_str();
  perturb_cmd->add_option("--seed", perturb.seed, "Master seed")->capture_default_str();
  perturb_cmd->add_option("--metrics", perturb.metrics)->delimiter(',')->capture_default_str();
  perturb_cmd->add_option("--bdm-block", perturb.bdm_block)->capture_default_str();
  perturb_cmd->add_option("--bdm-stride", perturb.bdm_stride)->capture_default_str();
  perturb_cmd->add_flag("--svg", perturb.svg, "Also write box plots");

  ScrambleOptions scramble;
  auto* scramble_cmd = app.add_subcommand("scramble", "Segment-scramble experiment");
  add_input_options(scramble_cmd, common);
  add_output_options(scramble_cmd, common);
  add_table_option(scramble_cmd, common);
  scramble_cmd->add_option("--segment-width", scramble.segment_width, "Cut every W bits")->capture_default_str();
  scramble_cmd->add_option("--boundaries", scramble.boundaries, "Explicit cut points (overrides --segment-width)")
      ->delimiter(',');
  scramble_cmd->add_option("--trials", scramble.trials)->capture_default_str();
  scramble_cmd->add_option("--seed", scramble.seed)->capture_default_str();
  scramble_cmd->add_option("--metric", scramble.metric)->capture_default_str();
  scramble_cmd->add_option("--bins", scramble.bins, "Histogram bins")->capture_default_str();
  scramble_cmd->add_option("--bdm-block", scramble.bdm_block)->capture_default_str();
  scramble_cmd->add_option("--bdm-stride", scramble.bdm_stride)->capture_default_str();
  scramble_cmd->add_flag("--svg", scramble.svg, "Also write a histogram");

  SweepOptions sweep;
  auto add_spike_options = [&](CLI::App* cmd) {
    cmd->add_option("--loss", sweep.loss, "Largest fraction of bits a partition may drop")->capture_default_str();
    cmd->add_option("--window", sweep.window, "Rolling window (odd)")->capture_default_str();
    cmd->add_option("--threshold", sweep.threshold, "Robust z threshold")->capture_default_str();
    cmd->add_option("--mad-floor", sweep.mad_floor, "MAD floor as a fraction of the local median")
        ->capture_default_str();
  };
  auto* sweep_cmd = app.add_subcommand("sweep", "Complexity landscape over all 2D partitions");
  add_input_options(sweep_cmd, common);
  add_output_options(sweep_cmd, common);
  add_table_option(sweep_cmd, common);
  add_spike_options(sweep_cmd);
  sweep_cmd->add_flag("--svg", sweep.svg, "Also write a line plot");
  sweep_cmd->add_flag("--radar", sweep.radar, "Also write a radar plot");

  auto* infer_cmd = app.add_subcommand("infer", "Rank candidate 2D or 3D shapes");
  add_input_options(infer_cmd, common);
  add_output_options(infer_cmd, common);
  add_table_option(infer_cmd, common);
  add_spike_options(infer_cmd);
  infer_cmd->add_option("--ndims", sweep.ndims, "2 or 3")->capture_default_str();
  infer_cmd->add_option("--top-k", sweep.top_k, "Number of candidates to report")->capture_default_str();

  std::string shape_text;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Reshape and rank mirror orientations");
  add_input_options(recon_cmd, common);
  add_output_options(recon_cmd, common);
  add_table_option(recon_cmd, common);
  recon_cmd->add_option("--shape", shape_text, "e.g. 32x64 or 16x16x16")->required();

  std::string replay_out;
  std::optional<unsigned> replay_threads;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare every output");
  replay_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay_cmd->add_option("-o,--out", replay_out, "Output directory (default: <manifest dir>/replay)");
  replay_cmd->add_option("--threads", replay_threads, "Override the recorded thread count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_ctm_gen(gen, out);
    if (encode_cmd->parsed()) return cmd_encode(common, out);
    if (analyze_cmd->parsed()) return cmd_analyze(common, analyze, out);
    if (perturb_cmd->parsed()) return cmd_perturb(common, perturb, out);
    if (scramble_cmd->parsed()) return cmd_scramble(common, scramble, out);
    if (sweep_cmd->parsed()) return cmd_sweep(common, sweep, out);
    if (infer_cmd->parsed()) return cmd_infer(common, sweep, out);
    if (recon_cmd->parsed()) return cmd_reconstruct(common, shape_text, out);
    if (replay_cmd->parsed()) return cmd_replay(manifest_path, replay_out, replay_threads, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dimsig::cli
