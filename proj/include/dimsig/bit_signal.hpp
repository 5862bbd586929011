#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dimsig {

using Bit = std::uint8_t;

// An ordered sequence of bits. Every message is ingested into this form
// before any measurement happens.
class BitSignal {
 public:
  BitSignal() = default;
  explicit BitSignal(std::vector<Bit> bits);
  BitSignal(std::size_t length, Bit value);

  // Parses '0'/'1' characters; whitespace is skipped, anything else throws.
  static BitSignal parse(std::string_view text);
  // MSB-first expansion of raw bytes.
  static BitSignal from_bytes(std::span<const std::uint8_t> bytes);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  Bit operator[](std::size_t i) const { return bits_[i]; }
  Bit& operator[](std::size_t i) { return bits_[i]; }

  std::span<const Bit> bits() const { return bits_; }
  std::size_t ones() const;
  double ones_fraction() const;

  BitSignal complement() const;
  BitSignal prefix(std::size_t count) const;
  BitSignal slice(std::size_t begin, std::size_t count) const;

  // MSB-first packing; the final byte is zero-padded.
  std::vector<std::uint8_t> pack() const;
  std::string to_string() const;

  friend bool operator==(const BitSignal&, const BitSignal&) = default;

 private:
  std::vector<Bit> bits_;
};

// Dimensions of a 2D (rows x cols) or 3D (rows x cols x planes) grid.
// Cells are stored row-major within a plane, planes consecutive.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t planes = 1;
  int rank = 2;

  static Shape plane(std::size_t rows, std::size_t cols) {
    return Shape{rows, cols, 1, 2};
  }
  static Shape volume(std::size_t rows, std::size_t cols, std::size_t planes) {
    return Shape{rows, cols, planes, 3};
  }

  std::size_t cells() const { return rows * cols * planes; }
  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

class Grid {
 public:
  Grid(Shape shape, std::vector<Bit> cells);
  Grid(Shape shape, Bit fill = 0);

  const Shape& shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t planes() const { return shape_.planes; }

  Bit at(std::size_t r, std::size_t c, std::size_t p = 0) const {
    return cells_[(p * shape_.rows + r) * shape_.cols + c];
  }
  Bit& at(std::size_t r, std::size_t c, std::size_t p = 0) {
    return cells_[(p * shape_.rows + r) * shape_.cols + c];
  }

  std::span<const Bit> cells() const { return cells_; }
  // One rows x cols slice of a volume, as a 2D grid.
  Grid plane(std::size_t p) const;
  Grid complement() const;
  BitSignal flatten() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_;
  std::vector<Bit> cells_;
};

}  // namespace dimsig
