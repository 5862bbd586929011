#include "dimsig/complexity.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace dimsig {

namespace {

// Sums CTM(w) + log2(n_w) over the distinct keys in `keys`. Terms are
// summed in sorted order so the result depends only on the multiset of
// terms, which makes complement and reordering symmetries exact.
BdmResult sum_blocks(std::vector<std::uint32_t>& keys, const CtmTable& table) {
  BdmResult result;
  result.window_count = keys.size();
  std::sort(keys.begin(), keys.end());
  std::vector<double> terms;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    const auto multiplicity = j - i;
    const CtmLookup hit = table.lookup_key(keys[i]);
    if (hit.fallback) result.fallback_windows += multiplicity;
    terms.push_back(hit.bits + std::log2(static_cast<double>(multiplicity)));
    i = j;
  }
  result.distinct = terms.size();
  std::sort(terms.begin(), terms.end());
  for (double t : terms) result.bits += t;
  return result;
}

double entropy_of_counts(const std::vector<std::size_t>& counts, std::size_t total) {
  std::vector<double> terms;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    terms.push_back(-p * std::log2(p));
  }
  std::sort(terms.begin(), terms.end());
  double h = 0.0;
  for (double t : terms) h += t;
  return h;
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::entropy: return "entropy";
    case Metric::block_entropy: return "block_entropy";
    case Metric::lzw: return "lzw";
    case Metric::deflate: return "deflate";
    case Metric::bdm: return "bdm";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::entropy, Metric::block_entropy, Metric::lzw, Metric::deflate, Metric::bdm}) {
    if (metric_name(m) == name) return m;
  }
  if (name == "zlib") return Metric::deflate;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

double shannon_entropy(const BitSignal& x) {
  if (x.empty()) throw std::invalid_argument("shannon_entropy: empty signal");
  const std::size_t ones = x.ones();
  return entropy_of_counts({x.size() - ones, ones}, x.size());
}

double block_entropy(const BitSignal& x, std::size_t block_len) {
  if (block_len == 0) throw std::invalid_argument("block_entropy: block length must be >= 1");
  if (block_len > x.size()) throw std::invalid_argument("block_entropy: block longer than signal");
  std::map<std::string, std::size_t> tally;
  const std::string text = x.to_string();
  const std::size_t blocks = x.size() / block_len;
  for (std::size_t b = 0; b < blocks; ++b) ++tally[text.substr(b * block_len, block_len)];
  std::vector<std::size_t> counts;
  counts.reserve(tally.size());
  for (const auto& [block, count] : tally) counts.push_back(count);
  return entropy_of_counts(counts, blocks);
}

std::size_t lzw_dict_len(const BitSignal& x) {
  // Trie of dictionary strings; node 0 is "0", node 1 is "1".
  std::vector<std::array<int, 2>> child{{-1, -1}, {-1, -1}};
  if (x.empty()) return child.size();
  int node = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Bit bit = x[i];
    const int next = child[static_cast<std::size_t>(node)][bit];
    if (next >= 0) {
      node = next;
    } else {
      child[static_cast<std::size_t>(node)][bit] = static_cast<int>(child.size());
      child.push_back({-1, -1});
      node = bit;
    }
  }
  return child.size();
}

std::size_t base64_length(std::size_t byte_count) {
  return 4 * ((byte_count + 2) / 3);
}

std::size_t deflate_b64_len(const BitSignal& x) {
  const std::vector<std::uint8_t> packed = x.pack();
  uLongf out_len = compressBound(static_cast<uLong>(packed.size()));
  std::vector<Bytef> out(out_len);
  const int rc = compress2(out.data(), &out_len, packed.data(), static_cast<uLong>(packed.size()),
                           Z_DEFAULT_COMPRESSION);
  if (rc != Z_OK) throw std::runtime_error("deflate_b64_len: zlib compress2 failed");
  return base64_length(out_len);
}

BdmResult bdm_1d(const BitSignal& x, const CtmTable& table, std::size_t block_len,
                 std::size_t stride) {
  if (table.dims() != 1) throw std::invalid_argument("bdm_1d: table is not 1D");
  if (block_len == 0 || block_len > Pattern::kMaxLength1d) {
    throw std::invalid_argument("bdm_1d: block length exceeds table coverage (1..16)");
  }
  if (stride == 0) throw std::invalid_argument("bdm_1d: stride must be >= 1");
  std::vector<std::uint32_t> keys;
  const auto bits = x.bits();
  for (std::size_t i = 0; i + block_len <= bits.size(); i += stride) {
    keys.push_back(line_key(bits.subspan(i, block_len)));
  }
  return sum_blocks(keys, table);
}

BdmResult bdm_2d(const Grid& g, const CtmTable& table, std::size_t stride) {
  if (table.dims() != 2) throw std::invalid_argument("bdm_2d: table is not 2D");
  if (g.shape().rank != 2) throw std::invalid_argument("bdm_2d: grid is not 2D");
  if (g.rows() < 4 || g.cols() < 4) throw std::invalid_argument("bdm_2d: grid smaller than 4x4");
  if (stride == 0) throw std::invalid_argument("bdm_2d: stride must be >= 1");
  const std::size_t rows = g.rows(), cols = g.cols();
  // nibble[r * span + c] holds cells (r, c..c+3), first cell high.
  const std::size_t span = cols - 3;
  std::vector<std::uint32_t> nibble(rows * span);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < span; ++c) {
      nibble[r * span + c] = (std::uint32_t{g.at(r, c)} << 3) | (std::uint32_t{g.at(r, c + 1)} << 2) |
                             (std::uint32_t{g.at(r, c + 2)} << 1) | g.at(r, c + 3);
    }
  }
  std::vector<std::uint32_t> keys;
  keys.reserve(((rows - 4) / stride + 1) * ((cols - 4) / stride + 1));
  for (std::size_t r = 0; r + 4 <= rows; r += stride) {
    for (std::size_t c = 0; c + 4 <= cols; c += stride) {
      keys.push_back((nibble[r * span + c] << 12) | (nibble[(r + 1) * span + c] << 8) |
                     (nibble[(r + 2) * span + c] << 4) | nibble[(r + 3) * span + c]);
    }
  }
  return sum_blocks(keys, table);
}

BdmResult bdm_3d(const Grid& v, const CtmTable& table) {
  if (v.rows() < 4 || v.cols() < 4) throw std::invalid_argument("bdm_3d: planes smaller than 4x4");
  BdmResult total;
  std::vector<double> plane_bits;
  for (std::size_t p = 0; p < v.planes(); ++p) {
    const BdmResult slice = bdm_2d(v.plane(p), table, 1);
    plane_bits.push_back(slice.bits);
    total.window_count += slice.window_count;
    total.distinct += slice.distinct;
    total.fallback_windows += slice.fallback_windows;
  }
  std::sort(plane_bits.begin(), plane_bits.end());
  for (double b : plane_bits) total.bits += b;
  return total;
}

bool ReportParams::wants(Metric m) const {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

std::optional<double> ComplexityReport::value(Metric m) const {
  switch (m) {
    case Metric::entropy: return entropy;
    case Metric::block_entropy: return block_entropy;
    case Metric::lzw:
      return lzw_dict_len ? std::optional<double>(static_cast<double>(*lzw_dict_len)) : std::nullopt;
    case Metric::deflate:
      return deflate_b64_len ? std::optional<double>(static_cast<double>(*deflate_b64_len))
                             : std::nullopt;
    case Metric::bdm: return bdm;
  }
  return std::nullopt;
}

namespace {

void fill_common(const BitSignal& flat, const ReportParams& params, std::size_t block_len,
                 ComplexityReport& r) {
  r.bits = flat.size();
  r.original_bits = params.original_bits == 0 ? flat.size() : params.original_bits;
  if (r.original_bits < r.bits) {
    throw std::invalid_argument("report: original_bits smaller than the measured signal");
  }
  if (params.wants(Metric::entropy)) r.entropy = shannon_entropy(flat);
  if (params.wants(Metric::block_entropy)) {
    r.block_entropy_len = block_len;
    r.block_entropy = block_entropy(flat, block_len);
  }
  if (params.wants(Metric::lzw)) r.lzw_dict_len = lzw_dict_len(flat);
  if (params.wants(Metric::deflate)) {
    r.deflate_b64_len = deflate_b64_len(flat);
    const double kept_ratio = static_cast<double>(r.bits) / static_cast<double>(r.original_bits);
    r.normalized_deflate = static_cast<double>(*r.deflate_b64_len) / kept_ratio;
  }
}

void fill_bdm(const BdmResult& b, ComplexityReport& r) {
  r.bdm = b.bits;
  r.normalized_bdm = b.normalized();
  r.bdm_windows = b.window_count;
  r.fallback_fraction = b.fallback_fraction();
}

const CtmTable& require_table(const CtmTable* table) {
  if (!table) throw std::invalid_argument("report: BDM requested without a CTM table");
  return *table;
}

}  // namespace

ComplexityReport report(const BitSignal& x, const CtmTable* table, const ReportParams& params) {
  ComplexityReport r;
  fill_common(x, params, params.block_entropy_len, r);
  if (params.wants(Metric::bdm)) {
    fill_bdm(bdm_1d(x, require_table(table), params.bdm_block, params.bdm_stride), r);
  }
  return r;
}

ComplexityReport report(const Grid& g, const CtmTable* table, const ReportParams& params) {
  ComplexityReport r;
  fill_common(g.flatten(), params, g.cols(), r);
  if (params.wants(Metric::bdm)) {
    const CtmTable& t = require_table(table);
    fill_bdm(g.shape().rank == 3 ? bdm_3d(g, t) : bdm_2d(g, t, params.bdm_grid_stride), r);
  }
  return r;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string report_to_json(const ComplexityReport& r) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const auto& opt) {
    if (opt) {
      j[key] = *opt;
    } else {
      j[key] = nullptr;
    }
  };
  j["bits"] = r.bits;
  j["original_bits"] = r.original_bits;
  put("entropy", r.entropy);
  put("block_entropy", r.block_entropy);
  j["block_entropy_len"] = r.block_entropy_len;
  put("lzw_dict_len", r.lzw_dict_len);
  put("deflate_b64_len", r.deflate_b64_len);
  put("normalized_deflate", r.normalized_deflate);
  put("bdm", r.bdm);
  put("normalized_bdm", r.normalized_bdm);
  j["bdm_windows"] = r.bdm_windows;
  put("fallback_fraction", r.fallback_fraction);
  return j.dump(2);
}

std::string report_csv_header() {
  return "bits,original_bits,entropy,block_entropy,block_entropy_len,lzw_dict_len,"
         "deflate_b64_len,normalized_deflate,bdm,normalized_bdm,bdm_windows,fallback_fraction";
}

std::string report_csv_row(const ComplexityReport& r) {
  auto d = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto z = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
  std::string row;
  row += std::to_string(r.bits) + "," + std::to_string(r.original_bits) + ",";
  row += d(r.entropy) + "," + d(r.block_entropy) + "," + std::to_string(r.block_entropy_len) + ",";
  row += z(r.lzw_dict_len) + "," + z(r.deflate_b64_len) + "," + d(r.normalized_deflate) + ",";
  row += d(r.bdm) + "," + d(r.normalized_bdm) + "," + std::to_string(r.bdm_windows) + ",";
  row += d(r.fallback_fraction);
  return row;
}

}  // namespace dimsig
