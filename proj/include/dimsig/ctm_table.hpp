#pragma once

// Coding Theorem Method tables.
//
// A table is built by running every machine of a small, exhaustively
// enumerable space from a blank tape (1D Turing machines) or blank plane
// (2D turmites) and tallying what the halting ones leave behind. The
// complexity of a pattern is then -log2 of its output frequency.
//
// Every machine is run from both blank symbols. Running from a blank of 1s
// is the same as running the symbol-relabeled machine from a blank of 0s
// and complementing its output, so the table tallies each halting output
// together with its complement. total_machines and total_halting count
// runs, i.e. twice the size of the enumerated machine space.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimsig/bit_signal.hpp"

namespace dimsig {

struct MachineSpace {
  int dims = 1;         // 1: Turing machines on a tape, 2: turmites on a plane
  int states = 3;
  int max_steps = 200;  // transitions executed, the halting one included

  static constexpr int kSymbols = 2;

  static MachineSpace default_1d() { return {1, 3, 200}; }
  static MachineSpace default_2d() { return {2, 2, 200}; }

  void validate() const;
  // Distinct instructions available to one (state, symbol) entry.
  std::uint64_t instructions_per_entry() const;
  // Size of the canonical enumeration, instructions^(2 * states).
  std::uint64_t machine_count() const;

  friend bool operator==(const MachineSpace&, const MachineSpace&) = default;
};

// A 1D bit string of 1..16 bits, or a 4x4 block.
//
// 1D keys carry a sentinel bit above the payload ((1 << len) | bits, first
// bit most significant) so strings of different lengths never collide.
// 2D keys are the 16 cells row-major, cell (0,0) in bit 15.
class Pattern {
 public:
  static constexpr std::size_t kMaxLength1d = 16;
  static constexpr std::size_t kBlockSide = 4;

  static Pattern line(std::span<const Bit> bits);
  static Pattern line(std::string_view bits);
  // Pads a rows x cols (each <= 4) block top-left with background zeros.
  static Pattern block(std::size_t rows, std::size_t cols, std::span<const Bit> cells);
  static Pattern block(std::string_view cells16);
  static Pattern from_key(int dims, std::uint32_t key);

  int dims() const { return dims_; }
  std::uint32_t key() const { return key_; }
  // Number of bits in the payload (16 for a block).
  std::size_t length() const;
  Pattern complement() const;
  std::string to_string() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;

 private:
  Pattern(int dims, std::uint32_t key) : dims_(dims), key_(key) {}
  int dims_ = 1;
  std::uint32_t key_ = 0;
};

inline std::uint32_t line_key(std::span<const Bit> bits) {
  std::uint32_t key = 1;
  for (Bit b : bits) key = (key << 1) | b;
  return key;
}

enum class RunOutcome { halted, nonhalting, discarded };

struct MachineRun {
  std::uint64_t machine_id = 0;
  RunOutcome outcome = RunOutcome::nonhalting;
  std::optional<Pattern> output;  // set iff outcome == halted
  int steps = 0;
};

using RunVisitor = std::function<void(const MachineRun&)>;

// Instruction of a (state, read-symbol) entry. next_state == -1 halts.
// For 1D, move is -1 (left) or +1 (right) and is 0 on halting instructions.
// For 2D, move indexes {up, down, left, right}.
struct Instruction {
  int write = 0;
  int move = 0;
  int next_state = -1;
};

// Canonical decoding of a machine id: one mixed-radix digit per
// (state, symbol) entry, entry (0,0) most significant.
std::vector<Instruction> decode_machine(const MachineSpace& space, std::uint64_t id);

// Runs a single machine from an all-zero blank.
MachineRun run_machine(const MachineSpace& space, std::uint64_t id);

// Streams every machine in [begin, end) of the canonical enumeration, in id
// order. 1D outputs longer than 16 cells and 2D outputs whose bounding box
// exceeds 4x4 are reported as discarded.
void enumerate_1d(const MachineSpace& space, std::uint64_t begin, std::uint64_t end,
                  const RunVisitor& visit);
void enumerate_1d(const MachineSpace& space, const RunVisitor& visit);
void enumerate_2d(const MachineSpace& space, std::uint64_t begin, std::uint64_t end,
                  const RunVisitor& visit);
void enumerate_2d(const MachineSpace& space, const RunVisitor& visit);

struct CtmEntry {
  Pattern pattern;
  std::uint64_t count = 0;
  double complexity = 0.0;
};

struct CtmLookup {
  double bits = 0.0;
  bool fallback = false;
};

class CtmTable {
 public:
  // counts must sum to total_halting; 0 < total_halting <= total_machines.
  CtmTable(MachineSpace space, std::vector<std::pair<Pattern, std::uint64_t>> counts,
           std::uint64_t total_machines, std::uint64_t total_halting);

  const MachineSpace& space() const { return space_; }
  int dims() const { return space_.dims; }
  std::uint64_t total_machines() const { return total_machines_; }
  std::uint64_t total_halting() const { return total_halting_; }
  double max_entry() const { return max_entry_; }
  double fallback_value() const { return max_entry_ + 1.0; }
  std::size_t size() const { return entries_.size(); }

  // Sorted lexicographically by the pattern's 0/1 text.
  const std::vector<CtmEntry>& entries() const { return entries_; }
  std::optional<std::uint64_t> count(const Pattern& p) const;

  // Stored complexity, or max_entry + 1 flagged as a fallback. Throws on a
  // dimensionality mismatch.
  CtmLookup lookup(const Pattern& p) const;
  // Unchecked fast path over raw keys (see Pattern).
  CtmLookup lookup_key(std::uint32_t key) const {
    const double v = dense_[key];
    return v < 0 ? CtmLookup{fallback_value(), true} : CtmLookup{v, false};
  }

  friend bool operator==(const CtmTable& a, const CtmTable& b);

 private:
  MachineSpace space_;
  std::vector<CtmEntry> entries_;
  std::uint64_t total_machines_ = 0;
  std::uint64_t total_halting_ = 0;
  double max_entry_ = 0.0;
  std::vector<double> dense_;  // -1 marks an absent key
};

struct BuildStats {
  std::uint64_t machines = 0;    // enumerated machines (one blank)
  std::uint64_t halting = 0;     // halted with a tallied output
  std::uint64_t discarded = 0;   // halted, output outside coverage
  std::uint64_t nonhalting = 0;
};

// Enumerates the space, tallies, and converts counts to complexities.
// Throws std::runtime_error if no machine halts with a tallied output.
CtmTable build_table(const MachineSpace& space, unsigned threads = 0,
                     BuildStats* stats = nullptr);

std::string serialize_table(const CtmTable& table);
CtmTable parse_table(std::string_view text);
void save_table(const CtmTable& table, const std::filesystem::path& path);
CtmTable load_table(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace dimsig
