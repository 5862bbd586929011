#pragma once

#include <array>
#include <string>
#include <vector>

#include "dimsig/bit_signal.hpp"
#include "dimsig/ctm_table.hpp"
#include "dimsig/landscape.hpp"

namespace dimsig {

// Row-major (then plane-major) fill from the first kept bits of x.
Grid reshape(const BitSignal& x, const Shape& shape);
Grid reshape(const BitSignal& x, const Partition& p);

// Per-axis mirror flags: {rows reversed, columns reversed, planes reversed}.
using Flips = std::array<bool, 3>;

Grid mirror(const Grid& g, const Flips& flips);

// Cyclic axis rotation: cell (r, c, p) moves to (c, p, r).
Grid rotate_axes(const Grid& v);

struct OrientationVariant {
  Flips flips{};
  Grid grid;
  double score = 0.0;  // normalized BDM (stride 1, slice-wise for volumes)

  int flip_count() const { return flips[0] + flips[1] + flips[2]; }
};

// All 4 (2D) or 8 (3D) mirror variants, ascending by score; ties go to
// fewer flips, then to the lexicographically smaller flag pattern.
std::vector<OrientationVariant> orientation_candidates(const Grid& g, const CtmTable& table);

// Plain PBM ("P1") text of one plane.
std::string to_pbm(const Grid& g, std::size_t plane = 0);

}  // namespace dimsig
