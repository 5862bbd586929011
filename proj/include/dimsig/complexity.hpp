#pragma once

// Information-content measures over bit signals and grids: Shannon and
// block entropy, LZW dictionary growth, DEFLATE+Base64 length, and the
// Block Decomposition Method (BDM) over a CTM table.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimsig/bit_signal.hpp"
#include "dimsig/ctm_table.hpp"

namespace dimsig {

enum class Metric { entropy, block_entropy, lzw, deflate, bdm };

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

// Empirical Shannon entropy in bits per symbol. Throws on an empty signal.
double shannon_entropy(const BitSignal& x);

// Entropy of the distribution of non-overlapping block_len-bit blocks
// (trailing remainder dropped), in bits per block.
double block_entropy(const BitSignal& x, std::size_t block_len);

// Dictionary size after textbook LZW over {0,1}: dictionary starts as
// {"0","1"} and gains (match + next bit) on every miss.
std::size_t lzw_dict_len(const BitSignal& x);

// zlib stream (default level) of the MSB-first packed bits, Base64 encoded
// with padding; returns the character count.
std::size_t deflate_b64_len(const BitSignal& x);
std::size_t base64_length(std::size_t byte_count);

struct BdmResult {
  double bits = 0.0;
  std::size_t window_count = 0;     // windows visited, with multiplicity
  std::size_t distinct = 0;
  std::size_t fallback_windows = 0; // windows whose block is absent from the table

  double normalized() const {
    return window_count == 0 ? 0.0 : bits / static_cast<double>(window_count);
  }
  double fallback_fraction() const {
    return window_count == 0 ? 0.0
                             : static_cast<double>(fallback_windows) / static_cast<double>(window_count);
  }
};

// Sum over distinct block_len-bit windows taken every `stride` bits of
// CTM(window) + log2(multiplicity).
BdmResult bdm_1d(const BitSignal& x, const CtmTable& table, std::size_t block_len = 8,
                 std::size_t stride = 8);

// Same over 4x4 windows of a 2D grid. At stride 1 the window count is
// (rows - 3)(cols - 3).
BdmResult bdm_2d(const Grid& g, const CtmTable& table, std::size_t stride = 1);

// Slice-wise approximation for volumes: bdm_2d summed over the planes.
BdmResult bdm_3d(const Grid& v, const CtmTable& table);

struct ReportParams {
  std::vector<Metric> metrics{Metric::entropy, Metric::block_entropy, Metric::lzw,
                              Metric::deflate, Metric::bdm};
  std::size_t block_entropy_len = 8;  // grids use their column count
  std::size_t bdm_block = 8;
  std::size_t bdm_stride = 8;
  std::size_t bdm_grid_stride = 1;
  // Length of the signal before truncation; 0 means "same as the input".
  std::size_t original_bits = 0;

  bool wants(Metric m) const;
};

struct ComplexityReport {
  std::size_t bits = 0;           // kept bits actually measured
  std::size_t original_bits = 0;
  std::optional<double> entropy;
  std::optional<double> block_entropy;
  std::size_t block_entropy_len = 0;
  std::optional<std::size_t> lzw_dict_len;
  std::optional<std::size_t> deflate_b64_len;
  std::optional<double> normalized_deflate;
  std::optional<double> bdm;
  std::optional<double> normalized_bdm;
  std::size_t bdm_windows = 0;
  std::optional<double> fallback_fraction;

  std::optional<double> value(Metric m) const;
};

// table may be null when BDM is not requested.
ComplexityReport report(const BitSignal& x, const CtmTable* table, const ReportParams& params);
ComplexityReport report(const Grid& g, const CtmTable* table, const ReportParams& params);

std::string report_to_json(const ComplexityReport& r);
// Column order: bits,original_bits,entropy,block_entropy,block_entropy_len,
// lzw_dict_len,deflate_b64_len,normalized_deflate,bdm,normalized_bdm,
// bdm_windows,fallback_fraction. Absent values are empty fields.
std::string report_csv_header();
std::string report_csv_row(const ComplexityReport& r);

// Shortest round-trip decimal form, used by every CSV/JSON writer.
std::string format_double(double v);

}  // namespace dimsig
