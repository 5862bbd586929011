#pragma once

// Structural perturbation: reshape a flat signal into every admissible
// 2D (and, in two stages, 3D) partition, measure each arrangement, and
// look for downward spikes in the resulting complexity landscape.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dimsig/bit_signal.hpp"
#include "dimsig/complexity.hpp"
#include "dimsig/ctm_table.hpp"

namespace dimsig {

struct Partition {
  Shape shape;
  std::size_t kept_bits = 0;
  double loss_fraction = 0.0;

  // s is the length of the signal being partitioned.
  static Partition of(Shape shape, std::size_t s);
};

// Every (m, floor(s/m)) with m * n >= (1 - loss_budget) * s, for m = 1..s.
std::vector<Partition> partition_candidates_2d(std::size_t s, double loss_budget);

// (v - min) / (max - min); all zeros when max == min. Throws on empty input.
std::vector<double> minmax_scale(const std::vector<double>& values);

struct LandscapePoint {
  Partition partition;
  std::optional<double> bdm;            // raw BDM; absent when a side is < 4
  std::optional<double> bdm_norm;       // BDM / window count
  double block_entropy = 0.0;           // block size = row length
  double deflate_norm = 0.0;            // deflate_b64_len / (kept / s)
  std::size_t deflate_b64_len = 0;
  std::optional<double> bdm_scaled;
  double entropy_scaled = 0.0;
  double deflate_scaled = 0.0;
  std::optional<double> spike_z;        // robust z of bdm_norm, MAD floored
  double fallback_fraction = 0.0;
};

struct Landscape {
  std::size_t signal_bits = 0;
  double loss_budget = 0.01;
  std::vector<LandscapePoint> points;   // sorted by (m, n, p)

  // Values of one metric (bdm, block_entropy or deflate) with the index of
  // the point each came from; BDM skips absent points. Raw values are the
  // normalized measurements before MinMax scaling.
  std::vector<std::pair<std::size_t, double>> scaled_series(Metric metric) const;
  std::vector<std::pair<std::size_t, double>> raw_series(Metric metric) const;
};

struct SpikeParams {
  std::size_t window = 9;
  double threshold = 2.5;
  // The MAD never drops below this fraction of the local median, so that
  // sub-percent jitter in a flat landscape is not read as a spike.
  double relative_mad_floor = 0.02;
};

// Robust z-score of every value against the rolling median and MAD of the
// window centered on it (truncated at the ends):
//   z = (v - median) / (1.4826 * max(MAD, floor * |median|)).
// Points whose effective MAD is zero get no score.
std::vector<std::optional<double>> rolling_robust_z(const std::vector<double>& values,
                                                    std::size_t window,
                                                    double relative_mad_floor = 0.0);

struct SpikeCandidate {
  Partition partition;
  std::size_t point_index = 0;  // into Landscape::points
  Metric metric = Metric::bdm;
  double value = 0.0;           // scaled metric value
  double depth = 0.0;           // robust z, <= -threshold
  std::size_t rank = 0;         // 1-based, ascending by value
};

// Downward spikes: z <= -threshold and value strictly below the global
// median of the series. z is taken on the raw values; MinMax scaling is
// affine, so only the MAD floor makes that differ from z on scaled values.
std::vector<SpikeCandidate> detect_spikes(const Landscape& landscape, Metric metric,
                                          const SpikeParams& params = {});

// Sweeps every 2D candidate partition of x (s >= 16) and fills all
// per-point metrics, the MinMax-scaled columns and spike_z.
Landscape structural_sweep(const BitSignal& x, double loss_budget, const CtmTable& table,
                           const SpikeParams& params = {}, unsigned threads = 0);

std::string landscape_csv(const Landscape& landscape);

struct Inference2d {
  Landscape landscape;
  std::vector<SpikeCandidate> ranked;  // at most top_k
  bool weak = false;                   // no spike cleared the threshold
};

Inference2d infer_dims_2d(const BitSignal& x, double loss_budget, const CtmTable& table,
                          std::size_t top_k, const SpikeParams& params = {}, unsigned threads = 0);

struct TripleCandidate {
  Shape shape;                 // rows x cols x planes; cols is the row width
  double stage1_value = 0.0;   // scaled BDM of the stage-1 row-width head
  double stage2_value = 0.0;   // scaled slice-wise score of this (rows, planes) split
  std::size_t stage1_family = 0;  // row widths folded into this head
  bool weak = false;
};

struct Inference3d {
  Inference2d stage1;
  std::vector<std::size_t> stage1_heads;   // row widths, best first
  std::vector<TripleCandidate> ranked;     // at most top_k
};

// Stage 1: 2D sweep; spike row widths that are multiples of a smaller
// spike width fold into that width. Stage 2: for each head width w, every
// split of the floor(s/w) rows into planes of h rows is scored by
// slice-wise BDM; plane heights fold into families the same way.
Inference3d infer_dims_3d(const BitSignal& x, double loss_budget, const CtmTable& table,
                          std::size_t top_k, const SpikeParams& params = {}, unsigned threads = 0);

// Stage-2 score of one volume: normalized slice-wise BDM averaged over the
// three axis-aligned slicings.
double volume_score(const Grid& v, const CtmTable& table);

}  // namespace dimsig
