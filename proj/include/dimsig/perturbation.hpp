#pragma once

// Bit-flip and segment-scramble perturbations with reproducible randomness,
// plus the summary statistics used to compare perturbed and original
// signals.
//
// Seeding: every trial draws from its own std::mt19937_64 seeded with
// trial_seed(master, k, trial), a fixed SplitMix64 cascade. Trials never
// share generator state, so results do not depend on execution order or
// thread count.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dimsig/bit_signal.hpp"
#include "dimsig/complexity.hpp"
#include "dimsig/ctm_table.hpp"

namespace dimsig {

std::uint64_t splitmix64(std::uint64_t x);
// splitmix64(splitmix64(splitmix64(master) ^ k) ^ trial)
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t k, std::uint64_t trial);

class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, n) by rejection, independent of the standard library's
  // distribution implementations.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Cost of describing a perturbation given the original signal: a header
// that is O(log s) bits plus the indices that pick the concrete variant.
struct DescriptionLength {
  double header_bits = 0.0;
  double index_bits = 0.0;
  double total() const { return header_bits + index_bits; }
};

// k distinct positions in [0, s), sorted, drawn by partial Fisher-Yates.
std::vector<std::size_t> sample_flip_positions(std::size_t s, std::size_t k, std::uint64_t seed);
BitSignal apply_flips(const BitSignal& x, std::span<const std::size_t> positions);
BitSignal flip_bits(const BitSignal& x, std::size_t k, std::uint64_t seed);
// log2(s + 1) for k, log2 C(s, k) for the position set.
DescriptionLength flip_description(std::size_t s, std::size_t k);

struct Stats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

// Linear interpolation between order statistics at q * (n - 1).
double quantile_sorted(std::span<const double> sorted, double q);
Stats summarize(std::vector<double> samples);

struct FlipExperimentPlan {
  std::vector<std::size_t> schedule;
  std::size_t trials_per_k = 1024;
  std::uint64_t master_seed = 0;
  std::vector<Metric> metrics{Metric::entropy, Metric::lzw, Metric::bdm, Metric::deflate};
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  unsigned threads = 0;

  void validate(std::size_t s) const;
};

// `points` evenly spaced flip counts from 0 to s inclusive (deduplicated).
std::vector<std::size_t> default_schedule(std::size_t s, std::size_t points = 32);
// "start:stop:step"; stop is appended when the stride does not land on it.
std::vector<std::size_t> parse_schedule(const std::string& spec, std::size_t s);

struct TrialSummary {
  std::size_t k = 0;
  std::vector<std::pair<Metric, Stats>> metrics;

  const Stats& at(Metric m) const;
};

double measure(const BitSignal& x, Metric m, const CtmTable* table, std::size_t bdm_block,
               std::size_t bdm_stride);

std::vector<TrialSummary> run_flip_experiment(const BitSignal& x, const FlipExperimentPlan& plan,
                                              const CtmTable* table);

// Columns k,metric,min,q1,median,q3,max,mean.
std::string trial_summaries_csv(const std::vector<TrialSummary>& rows);

struct Segment {
  std::size_t begin = 0;
  std::size_t length = 0;
};

// Cut points strictly increasing in [0, s]; 0 and s are implied.
std::vector<Segment> segments_from_boundaries(std::size_t s, std::span<const std::size_t> boundaries);
// Evenly sized cut points every `width` bits.
std::vector<std::size_t> uniform_boundaries(std::size_t s, std::size_t width);
std::vector<std::size_t> segment_permutation(std::size_t count, std::uint64_t seed);
BitSignal scramble(const BitSignal& x, std::span<const std::size_t> boundaries, std::uint64_t seed);
// header log2(s + 1) for the segment count, index log2(P!) for the order.
DescriptionLength scramble_description(std::size_t s, std::span<const std::size_t> boundaries);

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::size_t> counts;
};

struct ScrambleResult {
  double original = 0.0;
  std::vector<double> values;  // one per trial, in trial order
  Stats stats;
  Histogram change_histogram;  // of value - original
  double fraction_le = 0.0;    // trials whose value <= original
  // Mid-rank percentile of the original among the trials: ties count
  // half, so a metric that no scramble can move sits at 0.5.
  double percentile = 0.0;
};

struct ScrambleParams {
  std::size_t trials = 200;
  std::uint64_t master_seed = 0;
  Metric metric = Metric::deflate;
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  std::size_t histogram_bins = 20;
  unsigned threads = 0;
};

ScrambleResult scramble_experiment(const BitSignal& x, std::span<const std::size_t> boundaries,
                                   const ScrambleParams& params, const CtmTable* table);

}  // namespace dimsig
