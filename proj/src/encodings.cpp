#include "dimsig/encodings.hpp"

#include <stdexcept>
#include <vector>

#include "dimsig/error.hpp"

namespace dimsig {

namespace {

std::uint8_t single_byte(char ch, std::size_t index) {
  const auto byte = static_cast<std::uint8_t>(ch);
  if (byte >= 0x80) {
    throw std::invalid_argument("encode: character at index " + std::to_string(index) +
                                " is not a single-byte code point");
  }
  return byte;
}

void push_byte(std::vector<Bit>& bits, std::uint8_t byte) {
  for (int i = 7; i >= 0; --i) bits.push_back((byte >> i) & 1);
}

std::uint8_t read_byte(const BitSignal& x, std::size_t offset) {
  std::uint8_t byte = 0;
  for (std::size_t i = 0; i < 8; ++i) byte = static_cast<std::uint8_t>((byte << 1) | x[offset + i]);
  return byte;
}

}  // namespace

EncodingScheme EncodingScheme::indicator(std::set<char> chars) {
  if (chars.empty()) throw std::invalid_argument("indicator encoding needs a non-empty character set");
  return EncodingScheme(Kind::indicator, std::move(chars));
}

EncodingScheme EncodingScheme::parse(std::string_view name) {
  if (name == "utf8") return utf8();
  if (name == "balanced") return balanced();
  if (name == "vowel") return vowels();
  if (name == "space") return spaces();
  if (name.rfind("set:", 0) == 0) {
    const std::string_view chars = name.substr(4);
    return indicator(std::set<char>(chars.begin(), chars.end()));
  }
  throw std::invalid_argument("unknown encoding scheme '" + std::string(name) +
                              "' (expected utf8|balanced|vowel|space|set:<chars>)");
}

std::size_t EncodingScheme::bits_per_char() const {
  switch (kind_) {
    case Kind::utf8: return 8;
    case Kind::balanced: return 16;
    case Kind::indicator: return 1;
  }
  return 0;
}

std::string EncodingScheme::name() const {
  switch (kind_) {
    case Kind::utf8: return "utf8";
    case Kind::balanced: return "balanced";
    case Kind::indicator: break;
  }
  if (indicator_set_ == vowels().indicator_set_) return "vowel";
  if (indicator_set_ == std::set<char>{' '}) return "space";
  return "set:" + std::string(indicator_set_.begin(), indicator_set_.end());
}

BitSignal encode(std::string_view text, const EncodingScheme& scheme) {
  std::vector<Bit> bits;
  bits.reserve(text.size() * scheme.bits_per_char());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (scheme.kind()) {
      case EncodingScheme::Kind::utf8:
        push_byte(bits, single_byte(text[i], i));
        break;
      case EncodingScheme::Kind::balanced: {
        const std::uint8_t byte = single_byte(text[i], i);
        push_byte(bits, byte);
        push_byte(bits, static_cast<std::uint8_t>(~byte));
        break;
      }
      case EncodingScheme::Kind::indicator:
        bits.push_back(scheme.indicator_set().count(text[i]) ? 1 : 0);
        break;
    }
  }
  return BitSignal(std::move(bits));
}

std::string decode(const BitSignal& x, const EncodingScheme& scheme) {
  if (!scheme.invertible()) {
    throw std::invalid_argument("decode: indicator encoding '" + scheme.name() + "' is not invertible");
  }
  const std::size_t width = scheme.bits_per_char();
  if (x.size() % width != 0) {
    throw std::invalid_argument("decode: length " + std::to_string(x.size()) +
                                " is not a multiple of " + std::to_string(width));
  }
  std::string text;
  text.reserve(x.size() / width);
  for (std::size_t i = 0; i < x.size() / width; ++i) {
    const std::uint8_t byte = read_byte(x, i * width);
    if (scheme.kind() == EncodingScheme::Kind::balanced) {
      const std::uint8_t check = read_byte(x, i * width + 8);
      if (check != static_cast<std::uint8_t>(~byte)) {
        throw IntegrityError(i, "decode: balanced pair at character index " + std::to_string(i) +
                                    " is not (byte, ~byte)");
      }
    }
    text.push_back(static_cast<char>(byte));
  }
  return text;
}

}  // namespace dimsig
