#include "dimsig/reconstruct.hpp"

#include <algorithm>
#include <stdexcept>

#include "dimsig/complexity.hpp"

namespace dimsig {

Grid reshape(const BitSignal& x, const Shape& shape) {
  if (shape.cells() > x.size()) {
    throw std::invalid_argument("reshape: shape " + shape.to_string() + " needs " +
                                std::to_string(shape.cells()) + " bits, signal has " +
                                std::to_string(x.size()));
  }
  const auto bits = x.bits().first(shape.cells());
  return Grid(shape, std::vector<Bit>(bits.begin(), bits.end()));
}

Grid reshape(const BitSignal& x, const Partition& p) {
  return reshape(x, p.shape);
}

Grid mirror(const Grid& g, const Flips& flips) {
  Grid out(g.shape());
  const std::size_t rows = g.rows(), cols = g.cols(), planes = g.planes();
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t sp = flips[2] ? planes - 1 - p : p;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t sr = flips[0] ? rows - 1 - r : r;
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t sc = flips[1] ? cols - 1 - c : c;
        out.at(r, c, p) = g.at(sr, sc, sp);
      }
    }
  }
  return out;
}

Grid rotate_axes(const Grid& v) {
  const Shape in = v.shape();
  Grid out(Shape::volume(in.cols, in.planes, in.rows));
  for (std::size_t p = 0; p < in.planes; ++p) {
    for (std::size_t r = 0; r < in.rows; ++r) {
      for (std::size_t c = 0; c < in.cols; ++c) out.at(c, p, r) = v.at(r, c, p);
    }
  }
  return out;
}

std::vector<OrientationVariant> orientation_candidates(const Grid& g, const CtmTable& table) {
  if (g.rows() < 4 || g.cols() < 4) {
    throw std::invalid_argument("orientation_candidates: grid smaller than 4x4 per plane");
  }
  const bool volume = g.shape().rank == 3;
  std::vector<OrientationVariant> variants;
  const int combos = volume ? 8 : 4;
  for (int mask = 0; mask < combos; ++mask) {
    const Flips flips{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
    Grid grid = mirror(g, flips);
    const BdmResult b = volume ? bdm_3d(grid, table) : bdm_2d(grid, table, 1);
    variants.push_back({flips, std::move(grid), b.normalized()});
  }
  std::sort(variants.begin(), variants.end(), [](const OrientationVariant& a, const OrientationVariant& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.flip_count() != b.flip_count()) return a.flip_count() < b.flip_count();
    return a.flips < b.flips;
  });
  return variants;
}

std::string to_pbm(const Grid& g, std::size_t plane) {
  if (plane >= g.planes()) throw std::out_of_range("to_pbm: plane index out of range");
  std::string out = "P1\n" + std::to_string(g.cols()) + " " + std::to_string(g.rows()) + "\n";
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (c) out += ' ';
      out += g.at(r, c, plane) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace dimsig
