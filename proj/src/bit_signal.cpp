#include "dimsig/bit_signal.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace dimsig {

BitSignal::BitSignal(std::vector<Bit> bits) : bits_(std::move(bits)) {
  for (Bit b : bits_) {
    if (b > 1) throw std::invalid_argument("BitSignal: values must be 0 or 1");
  }
}

BitSignal::BitSignal(std::size_t length, Bit value)
    : bits_(length, value ? 1 : 0) {}

BitSignal BitSignal::parse(std::string_view text) {
  std::vector<Bit> bits;
  bits.reserve(text.size());
  for (char ch : text) {
    if (ch == '0' || ch == '1') {
      bits.push_back(static_cast<Bit>(ch - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw std::invalid_argument(std::string("BitSignal: unexpected character '") + ch + "'");
    }
  }
  return BitSignal(std::move(bits));
}

BitSignal BitSignal::from_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<Bit> bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t byte : bytes) {
    for (int i = 7; i >= 0; --i) bits.push_back((byte >> i) & 1);
  }
  return BitSignal(std::move(bits));
}

std::size_t BitSignal::ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), Bit{1}));
}

double BitSignal::ones_fraction() const {
  return bits_.empty() ? 0.0 : static_cast<double>(ones()) / static_cast<double>(bits_.size());
}

BitSignal BitSignal::complement() const {
  std::vector<Bit> out(bits_.size());
  std::transform(bits_.begin(), bits_.end(), out.begin(), [](Bit b) { return Bit(b ^ 1); });
  return BitSignal(std::move(out));
}

BitSignal BitSignal::prefix(std::size_t count) const {
  return slice(0, count);
}

BitSignal BitSignal::slice(std::size_t begin, std::size_t count) const {
  if (begin > bits_.size() || count > bits_.size() - begin) {
    throw std::out_of_range("BitSignal::slice: range exceeds signal length");
  }
  return BitSignal(std::vector<Bit>(bits_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    bits_.begin() + static_cast<std::ptrdiff_t>(begin + count)));
}

std::vector<std::uint8_t> BitSignal::pack() const {
  std::vector<std::uint8_t> bytes((bits_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return bytes;
}

std::string BitSignal::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i] = '1';
  }
  return out;
}

std::string Shape::to_string() const {
  std::string out = std::to_string(rows) + "x" + std::to_string(cols);
  if (rank == 3) out += "x" + std::to_string(planes);
  return out;
}

Grid::Grid(Shape shape, std::vector<Bit> cells) : shape_(shape), cells_(std::move(cells)) {
  if (shape_.rows == 0 || shape_.cols == 0 || shape_.planes == 0) {
    throw std::invalid_argument("Grid: every dimension must be >= 1");
  }
  if (shape_.rank == 2 && shape_.planes != 1) {
    throw std::invalid_argument("Grid: a 2D shape has exactly one plane");
  }
  if (cells_.size() != shape_.cells()) {
    throw std::invalid_argument("Grid: cell count " + std::to_string(cells_.size()) +
                                " does not match shape " + shape_.to_string());
  }
}

Grid::Grid(Shape shape, Bit fill) : Grid(shape, std::vector<Bit>(shape.cells(), fill)) {}

Grid Grid::plane(std::size_t p) const {
  if (p >= shape_.planes) throw std::out_of_range("Grid::plane: index out of range");
  const std::size_t area = shape_.rows * shape_.cols;
  auto first = cells_.begin() + static_cast<std::ptrdiff_t>(p * area);
  return Grid(Shape::plane(shape_.rows, shape_.cols),
              std::vector<Bit>(first, first + static_cast<std::ptrdiff_t>(area)));
}

Grid Grid::complement() const {
  std::vector<Bit> out(cells_.size());
  std::transform(cells_.begin(), cells_.end(), out.begin(), [](Bit b) { return Bit(b ^ 1); });
  return Grid(shape_, std::move(out));
}

BitSignal Grid::flatten() const {
  return BitSignal(cells_);
}

}  // namespace dimsig
