#include "dimsig/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dimsig/parallel.hpp"

namespace dimsig {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t k, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(master) ^ k) ^ trial);
}

std::uint64_t TrialRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("TrialRng::below: empty range");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::vector<std::size_t> sample_flip_positions(std::size_t s, std::size_t k, std::uint64_t seed) {
  if (k > s) throw std::invalid_argument("flip_bits: k exceeds signal length");
  std::vector<std::size_t> pool(s);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  TrialRng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(s - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

BitSignal apply_flips(const BitSignal& x, std::span<const std::size_t> positions) {
  BitSignal out = x;
  for (std::size_t p : positions) {
    if (p >= x.size()) throw std::out_of_range("apply_flips: position outside the signal");
    out[p] ^= 1;
  }
  return out;
}

BitSignal flip_bits(const BitSignal& x, std::size_t k, std::uint64_t seed) {
  const auto positions = sample_flip_positions(x.size(), k, seed);
  return apply_flips(x, positions);
}

DescriptionLength flip_description(std::size_t s, std::size_t k) {
  if (k > s) throw std::invalid_argument("flip_description: k exceeds signal length");
  const double ln2 = std::log(2.0);
  const double log_choose = std::lgamma(static_cast<double>(s) + 1) -
                            std::lgamma(static_cast<double>(k) + 1) -
                            std::lgamma(static_cast<double>(s - k) + 1);
  return {std::log2(static_cast<double>(s) + 1), std::max(0.0, log_choose / ln2)};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no samples");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Stats summarize(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  std::sort(samples.begin(), samples.end());
  Stats st;
  st.min = samples.front();
  st.max = samples.back();
  st.q1 = quantile_sorted(samples, 0.25);
  st.median = quantile_sorted(samples, 0.5);
  st.q3 = quantile_sorted(samples, 0.75);
  double sum = 0.0;
  for (double v : samples) sum += v;
  st.mean = sum / static_cast<double>(samples.size());
  return st;
}

void FlipExperimentPlan::validate(std::size_t s) const {
  if (trials_per_k == 0) throw std::invalid_argument("flip plan: trials_per_k must be >= 1");
  if (schedule.empty()) throw std::invalid_argument("flip plan: empty schedule");
  if (metrics.empty()) throw std::invalid_argument("flip plan: no metrics selected");
  std::vector<std::size_t> sorted = schedule;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("flip plan: schedule values must be distinct");
  }
  if (sorted.back() > s) throw std::invalid_argument("flip plan: schedule value exceeds signal length");
}

std::vector<std::size_t> default_schedule(std::size_t s, std::size_t points) {
  std::vector<std::size_t> out;
  if (points < 2) points = 2;
  for (std::size_t i = 0; i < points; ++i) {
    const auto k = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(s) / static_cast<double>(points - 1)));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> parse_schedule(const std::string& spec, std::size_t s) {
  std::vector<std::size_t> parts;
  std::stringstream in(spec);
  for (std::string field; std::getline(in, field, ':');) {
    if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("schedule: expected start:stop:step, got '" + spec + "'");
    }
    parts.push_back(std::stoull(field));
  }
  if (parts.size() != 3 || parts[2] == 0 || parts[0] > parts[1]) {
    throw std::invalid_argument("schedule: expected start:stop:step with step > 0, got '" + spec + "'");
  }
  if (parts[1] > s) throw std::invalid_argument("schedule: stop exceeds signal length");
  std::vector<std::size_t> out;
  for (std::size_t k = parts[0]; k <= parts[1]; k += parts[2]) out.push_back(k);
  if (out.back() != parts[1]) out.push_back(parts[1]);
  return out;
}

const Stats& TrialSummary::at(Metric m) const {
  for (const auto& [metric, stats] : metrics) {
    if (metric == m) return stats;
  }
  throw std::out_of_range("TrialSummary: metric not measured");
}

double measure(const BitSignal& x, Metric m, const CtmTable* table, std::size_t bdm_block,
               std::size_t bdm_stride) {
  switch (m) {
    case Metric::entropy: return shannon_entropy(x);
    case Metric::block_entropy: return block_entropy(x, bdm_block);
    case Metric::lzw: return static_cast<double>(lzw_dict_len(x));
    case Metric::deflate: return static_cast<double>(deflate_b64_len(x));
    case Metric::bdm:
      if (!table) throw std::invalid_argument("BDM requested without a CTM table");
      return bdm_1d(x, *table, bdm_block, bdm_stride).bits;
  }
  return 0.0;
}

std::vector<TrialSummary> run_flip_experiment(const BitSignal& x, const FlipExperimentPlan& plan,
                                              const CtmTable* table) {
  plan.validate(x.size());
  for (Metric m : plan.metrics) {
    if (m == Metric::bdm && !table) throw std::invalid_argument("BDM requested without a CTM table");
  }
  const std::size_t trials = plan.trials_per_k;
  const std::size_t metric_count = plan.metrics.size();
  const std::size_t jobs = plan.schedule.size() * trials;
  // samples[(row * trials + t) * metric_count + m]
  std::vector<double> samples(jobs * metric_count);
  parallel_for(jobs, plan.threads, [&](std::size_t job) {
    const std::size_t row = job / trials;
    const std::size_t t = job % trials;
    const std::size_t k = plan.schedule[row];
    const BitSignal flipped = flip_bits(x, k, trial_seed(plan.master_seed, k, t));
    for (std::size_t m = 0; m < metric_count; ++m) {
      samples[job * metric_count + m] =
          measure(flipped, plan.metrics[m], table, plan.bdm_block, plan.bdm_stride);
    }
  });

  std::vector<TrialSummary> out;
  for (std::size_t row = 0; row < plan.schedule.size(); ++row) {
    TrialSummary summary;
    summary.k = plan.schedule[row];
    for (std::size_t m = 0; m < metric_count; ++m) {
      std::vector<double> values(trials);
      for (std::size_t t = 0; t < trials; ++t) {
        values[t] = samples[((row * trials) + t) * metric_count + m];
      }
      summary.metrics.emplace_back(plan.metrics[m], summarize(std::move(values)));
    }
    out.push_back(std::move(summary));
  }
  return out;
}

std::string trial_summaries_csv(const std::vector<TrialSummary>& rows) {
  std::string out = "k,metric,min,q1,median,q3,max,mean\n";
  for (const auto& row : rows) {
    for (const auto& [metric, st] : row.metrics) {
      out += std::to_string(row.k) + "," + std::string(metric_name(metric)) + "," +
             format_double(st.min) + "," + format_double(st.q1) + "," + format_double(st.median) +
             "," + format_double(st.q3) + "," + format_double(st.max) + "," +
             format_double(st.mean) + "\n";
    }
  }
  return out;
}

std::vector<Segment> segments_from_boundaries(std::size_t s, std::span<const std::size_t> boundaries) {
  std::vector<std::size_t> cuts;
  cuts.push_back(0);
  for (std::size_t b : boundaries) {
    if (b > s) throw std::invalid_argument("scramble: boundary outside [0, s]");
    if (b <= cuts.back() && !(b == 0 && cuts.size() == 1)) {
      throw std::invalid_argument("scramble: boundaries must be strictly increasing");
    }
    if (b != 0) cuts.push_back(b);
  }
  if (cuts.back() != s) cuts.push_back(s);
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) segments.push_back({cuts[i], cuts[i + 1] - cuts[i]});
  return segments;
}

std::vector<std::size_t> uniform_boundaries(std::size_t s, std::size_t width) {
  if (width == 0) throw std::invalid_argument("uniform_boundaries: width must be >= 1");
  std::vector<std::size_t> cuts;
  for (std::size_t b = width; b < s; b += width) cuts.push_back(b);
  return cuts;
}

std::vector<std::size_t> segment_permutation(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrialRng rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

BitSignal scramble(const BitSignal& x, std::span<const std::size_t> boundaries, std::uint64_t seed) {
  const auto segments = segments_from_boundaries(x.size(), boundaries);
  const auto order = segment_permutation(segments.size(), seed);
  std::vector<Bit> out;
  out.reserve(x.size());
  const auto bits = x.bits();
  for (std::size_t idx : order) {
    const auto seg = bits.subspan(segments[idx].begin, segments[idx].length);
    out.insert(out.end(), seg.begin(), seg.end());
  }
  return BitSignal(std::move(out));
}

DescriptionLength scramble_description(std::size_t s, std::span<const std::size_t> boundaries) {
  const auto segments = segments_from_boundaries(s, boundaries);
  const double log_factorial = std::lgamma(static_cast<double>(segments.size()) + 1) / std::log(2.0);
  return {std::log2(static_cast<double>(s) + 1), log_factorial};
}

ScrambleResult scramble_experiment(const BitSignal& x, std::span<const std::size_t> boundaries,
                                   const ScrambleParams& params, const CtmTable* table) {
  if (params.trials == 0) throw std::invalid_argument("scramble_experiment: trials must be >= 1");
  segments_from_boundaries(x.size(), boundaries);  // validates
  ScrambleResult result;
  result.original = measure(x, params.metric, table, params.bdm_block, params.bdm_stride);
  result.values.assign(params.trials, 0.0);
  parallel_for(params.trials, params.threads, [&](std::size_t t) {
    const BitSignal scrambled = scramble(x, boundaries, trial_seed(params.master_seed, 0, t));
    result.values[t] = measure(scrambled, params.metric, table, params.bdm_block, params.bdm_stride);
  });
  result.stats = summarize(result.values);
  std::size_t less = 0, equal = 0;
  for (double v : result.values) {
    less += v < result.original ? 1 : 0;
    equal += v == result.original ? 1 : 0;
  }
  const double n = static_cast<double>(params.trials);
  result.fraction_le = static_cast<double>(less + equal) / n;
  result.percentile = (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) / n;

  const std::size_t bins = std::max<std::size_t>(1, params.histogram_bins);
  const double lo = result.stats.min - result.original;
  const double hi = result.stats.max - result.original;
  result.change_histogram.lo = lo;
  result.change_histogram.width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  result.change_histogram.counts.assign(bins, 0);
  for (double v : result.values) {
    auto bin = static_cast<std::size_t>((v - result.original - lo) / result.change_histogram.width);
    ++result.change_histogram.counts[std::min(bin, bins - 1)];
  }
  return result;
}

}  // namespace dimsig
