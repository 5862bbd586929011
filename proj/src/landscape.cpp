#include "dimsig/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dimsig/parallel.hpp"
#include "dimsig/perturbation.hpp"
#include "dimsig/reconstruct.hpp"

namespace dimsig {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

std::string opt_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

Partition Partition::of(Shape shape, std::size_t s) {
  const std::size_t kept = shape.cells();
  if (kept > s) throw std::invalid_argument("Partition: shape larger than the signal");
  Partition p;
  p.shape = shape;
  p.kept_bits = kept;
  p.loss_fraction = s == 0 ? 0.0 : 1.0 - static_cast<double>(kept) / static_cast<double>(s);
  return p;
}

std::vector<Partition> partition_candidates_2d(std::size_t s, double loss_budget) {
  if (s == 0) throw std::invalid_argument("partition_candidates_2d: empty signal");
  if (!(loss_budget >= 0.0 && loss_budget < 1.0)) {
    throw std::invalid_argument("partition_candidates_2d: loss budget must be in [0, 1)");
  }
  const double floor_bits = (1.0 - loss_budget) * static_cast<double>(s);
  std::vector<Partition> out;
  for (std::size_t m = 1; m <= s; ++m) {
    const std::size_t n = s / m;
    if (static_cast<double>(m * n) >= floor_bits) out.push_back(Partition::of(Shape::plane(m, n), s));
  }
  return out;
}

std::vector<double> minmax_scale(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("minmax_scale: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(values.size(), 0.0);
  if (hi == lo) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
  return out;
}

std::vector<std::pair<std::size_t, double>> Landscape::scaled_series(Metric metric) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    switch (metric) {
      case Metric::bdm:
        if (pt.bdm_scaled) out.emplace_back(i, *pt.bdm_scaled);
        break;
      case Metric::block_entropy:
      case Metric::entropy:
        out.emplace_back(i, pt.entropy_scaled);
        break;
      case Metric::deflate:
        out.emplace_back(i, pt.deflate_scaled);
        break;
      case Metric::lzw:
        throw std::invalid_argument("landscape: LZW is not part of the structural sweep");
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> Landscape::raw_series(Metric metric) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    switch (metric) {
      case Metric::bdm:
        if (pt.bdm_norm) out.emplace_back(i, *pt.bdm_norm);
        break;
      case Metric::block_entropy:
      case Metric::entropy:
        out.emplace_back(i, pt.block_entropy);
        break;
      case Metric::deflate:
        out.emplace_back(i, pt.deflate_norm);
        break;
      case Metric::lzw:
        throw std::invalid_argument("landscape: LZW is not part of the structural sweep");
    }
  }
  return out;
}

std::vector<std::optional<double>> rolling_robust_z(const std::vector<double>& values,
                                                    std::size_t window, double relative_mad_floor) {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("spikes: window must be odd and >= 3");
  const std::size_t half = window / 2;
  std::vector<std::optional<double>> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size(), i + half + 1);
    std::vector<double> local(values.begin() + static_cast<std::ptrdiff_t>(lo),
                              values.begin() + static_cast<std::ptrdiff_t>(hi));
    const double med = median_of(local);
    for (double& v : local) v = std::abs(v - med);
    const double mad = std::max(median_of(local), relative_mad_floor * std::abs(med));
    if (mad > 0.0) z[i] = (values[i] - med) / (1.4826 * mad);
  }
  return z;
}

std::vector<SpikeCandidate> detect_spikes(const Landscape& landscape, Metric metric,
                                          const SpikeParams& params) {
  if (!(params.threshold > 0.0)) throw std::invalid_argument("spikes: threshold must be > 0");
  const auto series = landscape.scaled_series(metric);
  const auto raw_series = landscape.raw_series(metric);
  if (series.size() < params.window) {
    throw std::invalid_argument("spikes: landscape has fewer points than the window");
  }
  std::vector<double> raw;
  raw.reserve(raw_series.size());
  for (const auto& [idx, v] : raw_series) raw.push_back(v);
  const auto z = rolling_robust_z(raw, params.window, params.relative_mad_floor);
  const double global_median = median_of(raw);

  std::vector<SpikeCandidate> out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!z[i] || *z[i] > -params.threshold || !(raw[i] < global_median)) continue;
    SpikeCandidate c;
    c.point_index = series[i].first;
    c.partition = landscape.points[c.point_index].partition;
    c.metric = metric;
    c.value = series[i].second;
    c.depth = *z[i];
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SpikeCandidate& a, const SpikeCandidate& b) { return a.value < b.value; });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = r + 1;
  return out;
}

Landscape structural_sweep(const BitSignal& x, double loss_budget, const CtmTable& table,
                           const SpikeParams& params, unsigned threads) {
  if (x.size() < 16) throw std::invalid_argument("structural_sweep: signal shorter than 16 bits");
  if (table.dims() != 2) throw std::invalid_argument("structural_sweep: needs a 2D CTM table");
  Landscape land;
  land.signal_bits = x.size();
  land.loss_budget = loss_budget;
  const auto partitions = partition_candidates_2d(x.size(), loss_budget);
  land.points.resize(partitions.size());
  const double s = static_cast<double>(x.size());
  parallel_for(partitions.size(), threads, [&](std::size_t i) {
    LandscapePoint& pt = land.points[i];
    pt.partition = partitions[i];
    const Shape& shape = pt.partition.shape;
    const BitSignal kept = x.prefix(pt.partition.kept_bits);
    if (shape.rows >= 4 && shape.cols >= 4) {
      const BdmResult b = bdm_2d(reshape(x, shape), table, 1);
      pt.bdm = b.bits;
      pt.bdm_norm = b.normalized();
      pt.fallback_fraction = b.fallback_fraction();
    }
    pt.block_entropy = block_entropy(kept, shape.cols);
    pt.deflate_b64_len = deflate_b64_len(kept);
    pt.deflate_norm = static_cast<double>(pt.deflate_b64_len) /
                      (static_cast<double>(pt.partition.kept_bits) / s);
  });

  std::vector<double> bdm_values, entropy_values, deflate_values;
  for (const auto& pt : land.points) {
    if (pt.bdm_norm) bdm_values.push_back(*pt.bdm_norm);
    entropy_values.push_back(pt.block_entropy);
    deflate_values.push_back(pt.deflate_norm);
  }
  const auto entropy_scaled = minmax_scale(entropy_values);
  const auto deflate_scaled = minmax_scale(deflate_values);
  const auto bdm_scaled = bdm_values.empty() ? std::vector<double>{} : minmax_scale(bdm_values);
  std::size_t b = 0;
  for (std::size_t i = 0; i < land.points.size(); ++i) {
    auto& pt = land.points[i];
    pt.entropy_scaled = entropy_scaled[i];
    pt.deflate_scaled = deflate_scaled[i];
    if (pt.bdm_norm) pt.bdm_scaled = bdm_scaled[b++];
  }
  if (bdm_values.size() >= params.window) {
    const auto z = rolling_robust_z(bdm_values, params.window, params.relative_mad_floor);
    b = 0;
    for (auto& pt : land.points) {
      if (pt.bdm_scaled) pt.spike_z = z[b++];
    }
  }
  return land;
}

std::string landscape_csv(const Landscape& landscape) {
  std::string out =
      "m,n,p,kept_bits,loss,bdm,bdm_norm,block_entropy,deflate_norm,bdm_scaled,entropy_scaled,"
      "deflate_scaled,spike_z\n";
  for (const auto& pt : landscape.points) {
    const Shape& sh = pt.partition.shape;
    out += std::to_string(sh.rows) + "," + std::to_string(sh.cols) + "," + std::to_string(sh.planes) +
           "," + std::to_string(pt.partition.kept_bits) + "," + format_double(pt.partition.loss_fraction) +
           "," + opt_csv(pt.bdm) + "," + opt_csv(pt.bdm_norm) + "," + format_double(pt.block_entropy) +
           "," + format_double(pt.deflate_norm) + "," + opt_csv(pt.bdm_scaled) + "," +
           format_double(pt.entropy_scaled) + "," + format_double(pt.deflate_scaled) + "," +
           opt_csv(pt.spike_z) + "\n";
  }
  return out;
}

Inference2d infer_dims_2d(const BitSignal& x, double loss_budget, const CtmTable& table,
                          std::size_t top_k, const SpikeParams& params, unsigned threads) {
  if (top_k == 0) throw std::invalid_argument("infer_dims_2d: top_k must be >= 1");
  Inference2d result;
  result.landscape = structural_sweep(x, loss_budget, table, params, threads);
  auto spikes = detect_spikes(result.landscape, Metric::bdm, params);
  if (spikes.empty()) {
    result.weak = true;
    auto series = result.landscape.scaled_series(Metric::bdm);
    std::stable_sort(series.begin(), series.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [idx, value] : series) {
      SpikeCandidate c;
      c.point_index = idx;
      c.partition = result.landscape.points[idx].partition;
      c.value = value;
      c.depth = result.landscape.points[idx].spike_z.value_or(0.0);
      c.rank = spikes.size() + 1;
      spikes.push_back(c);
    }
  }
  if (spikes.size() > top_k) spikes.resize(top_k);
  result.ranked = std::move(spikes);
  return result;
}

double volume_score(const Grid& v, const CtmTable& table) {
  Grid view = v;
  double total = 0.0;
  int used = 0;
  for (int axis = 0; axis < 3; ++axis) {
    if (view.rows() >= 4 && view.cols() >= 4) {
      total += bdm_3d(view, table).normalized();
      ++used;
    }
    view = rotate_axes(view);
  }
  return total / used;
}

namespace {

// Folds every value that is a multiple of a smaller member of `heads` into
// that member. Input is ranked best first; output keeps first-seen order.
std::vector<std::pair<std::size_t, std::size_t>> fold_multiples(const std::vector<std::size_t>& ranked) {
  std::vector<std::size_t> sorted = ranked;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::size_t, std::size_t>> families;  // head, members
  for (std::size_t value : ranked) {
    std::size_t head = value;
    for (std::size_t d : sorted) {
      if (d >= value) break;
      if (value % d == 0) {
        head = d;
        break;
      }
    }
    auto it = std::find_if(families.begin(), families.end(),
                           [&](const auto& f) { return f.first == head; });
    if (it == families.end()) {
      families.emplace_back(head, 1);
    } else {
      ++it->second;
    }
  }
  return families;
}

}  // namespace

Inference3d infer_dims_3d(const BitSignal& x, double loss_budget, const CtmTable& table,
                          std::size_t top_k, const SpikeParams& params, unsigned threads) {
  if (x.size() < 64) throw std::invalid_argument("infer_dims_3d: signal shorter than 64 bits");
  if (top_k == 0) throw std::invalid_argument("infer_dims_3d: top_k must be >= 1");
  Inference3d result;
  const std::size_t stage1_keep = std::max<std::size_t>(top_k, 8);
  result.stage1 = infer_dims_2d(x, loss_budget, table, stage1_keep, params, threads);
  const Landscape& land = result.stage1.landscape;

  std::vector<std::size_t> widths;
  std::vector<double> width_value;
  for (const auto& c : detect_spikes(land, Metric::bdm, params)) {
    widths.push_back(c.partition.shape.cols);
    width_value.push_back(c.value);
  }
  if (widths.empty()) {
    for (const auto& c : result.stage1.ranked) {
      widths.push_back(c.partition.shape.cols);
      width_value.push_back(c.value);
    }
  }
  const auto width_families = fold_multiples(widths);

  for (const auto& [width, members] : width_families) {
    result.stage1_heads.push_back(width);
    const std::size_t rows = x.size() / width;
    if (rows < 16 || width < 4) continue;
    double head_value = 0.0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (widths[i] == width) head_value = width_value[i];
    }

    // Stage 2: plane height h and plane count p over the rows.
    std::vector<Partition> splits;
    for (const auto& p : partition_candidates_2d(rows, loss_budget)) {
      if (p.shape.rows >= 4) splits.push_back(p);
    }
    std::vector<double> scores(splits.size());
    parallel_for(splits.size(), threads, [&](std::size_t i) {
      const Shape vol = Shape::volume(splits[i].shape.rows, width, splits[i].shape.cols);
      scores[i] = volume_score(reshape(x, vol), table);
    });
    const auto scaled = minmax_scale(scores);

    std::vector<std::size_t> order(splits.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::size_t> picked;
    bool weak = true;
    if (scaled.size() >= params.window) {
      const auto z = rolling_robust_z(scores, params.window, params.relative_mad_floor);
      const double med = median_of(scores);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (z[i] && *z[i] <= -params.threshold && scores[i] < med) picked.push_back(i);
      }
      weak = picked.empty();
    }
    if (picked.empty()) picked = order;
    std::stable_sort(picked.begin(), picked.end(),
                     [&](std::size_t a, std::size_t b) { return scaled[a] < scaled[b]; });
    std::vector<std::size_t> heights;
    for (std::size_t i : picked) heights.push_back(splits[i].shape.rows);
    for (const auto& [height, count] : fold_multiples(heights)) {
      const auto it = std::find_if(splits.begin(), splits.end(),
                                   [&](const Partition& p) { return p.shape.rows == height; });
      const std::size_t i = static_cast<std::size_t>(it - splits.begin());
      TripleCandidate t;
      t.shape = Shape::volume(height, width, splits[i].shape.cols);
      t.stage1_value = head_value;
      t.stage2_value = scaled[i];
      t.stage1_family = members;
      t.weak = weak || result.stage1.weak;
      result.ranked.push_back(t);
    }
  }
  if (result.ranked.size() > top_k) result.ranked.resize(top_k);
  return result;
}

}  // namespace dimsig
