#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dimsig {

// Base for data-level failures (bad files, corrupted tables, broken
// encodings). Precondition violations use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

// Raised by balanced decoding when a byte pair is not (b, ~b).
class IntegrityError : public Error {
 public:
  IntegrityError(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace dimsig
