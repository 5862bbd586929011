#pragma once

// Text binarizers: 8-bit UTF-8, 16-bit balanced (byte followed by its
// complement), and 1-bit indicator encodings (1 iff the character is in a
// chosen set, e.g. vowels or the space character).

#include <set>
#include <string>
#include <string_view>

#include "dimsig/bit_signal.hpp"

namespace dimsig {

class EncodingScheme {
 public:
  enum class Kind { utf8, balanced, indicator };

  static EncodingScheme utf8() { return EncodingScheme(Kind::utf8, {}); }
  static EncodingScheme balanced() { return EncodingScheme(Kind::balanced, {}); }
  static EncodingScheme indicator(std::set<char> chars);
  static EncodingScheme vowels() { return indicator({'A', 'a', 'E', 'e', 'I', 'i', 'O', 'o', 'U', 'u'}); }
  static EncodingScheme spaces() { return indicator({' '}); }
  // utf8 | balanced | vowel | space | set:<chars>
  static EncodingScheme parse(std::string_view name);

  Kind kind() const { return kind_; }
  const std::set<char>& indicator_set() const { return indicator_set_; }
  bool invertible() const { return kind_ != Kind::indicator; }
  std::size_t bits_per_char() const;
  std::string name() const;

 private:
  EncodingScheme(Kind kind, std::set<char> chars) : kind_(kind), indicator_set_(std::move(chars)) {}
  Kind kind_;
  std::set<char> indicator_set_;
};

// utf8/balanced reject characters outside the single-byte range (>= 0x80).
BitSignal encode(std::string_view text, const EncodingScheme& scheme);

// Inverse of encode for utf8 and balanced. Throws std::invalid_argument for
// indicator schemes or bad lengths, IntegrityError for a broken balanced pair.
std::string decode(const BitSignal& x, const EncodingScheme& scheme);

}  // namespace dimsig
