#include "dimsig/ctm_table.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dimsig/error.hpp"
#include "dimsig/parallel.hpp"

namespace dimsig {

namespace {

constexpr std::size_t kDense1d = std::size_t{1} << (Pattern::kMaxLength1d + 1);
constexpr std::size_t kDense2d = std::size_t{1} << 16;

std::size_t dense_size(int dims) { return dims == 1 ? kDense1d : kDense2d; }

int key_length_1d(std::uint32_t key) {
  int len = 0;
  while ((key >> (len + 1)) != 0) ++len;
  return len;
}

std::uint32_t complement_key(int dims, std::uint32_t key) {
  if (dims == 2) return key ^ 0xFFFFu;
  const int len = key_length_1d(key);
  const std::uint32_t mask = (std::uint32_t{1} << len) - 1;
  return key ^ mask;
}

// Flat instruction table for the inner simulation loops, indexed by
// state * 2 + symbol.
struct Program {
  std::array<std::int8_t, 64> write{};
  std::array<std::int8_t, 64> move{};
  std::array<std::int8_t, 64> next{};
  bool can_halt = false;
};

// Returns the id left over after consuming every digit (0 for valid ids).
std::uint64_t decode_into(const MachineSpace& space, std::uint64_t id, Instruction* out) {
  const std::uint64_t base = space.instructions_per_entry();
  const std::size_t entries = 2 * static_cast<std::size_t>(space.states);
  const auto n = static_cast<std::uint64_t>(space.states);
  for (std::size_t e = entries; e-- > 0;) {
    const std::uint64_t digit = id % base;
    id /= base;
    Instruction ins;
    if (space.dims == 1) {
      if (digit < 2) {
        ins = {static_cast<int>(digit), 0, -1};
      } else {
        const std::uint64_t rest = digit - 2;
        const std::uint64_t move_next = rest % (2 * n);
        ins.write = static_cast<int>(rest / (2 * n));
        ins.move = move_next / n == 0 ? -1 : 1;
        ins.next_state = static_cast<int>(move_next % n);
      }
    } else {
      ins.write = static_cast<int>(digit % 2);
      ins.move = static_cast<int>((digit / 2) % 4);
      const std::uint64_t target = digit / 8;
      ins.next_state = target == 0 ? -1 : static_cast<int>(target - 1);
    }
    out[e] = ins;
  }
  return id;
}

Program compile(const MachineSpace& space, std::uint64_t id) {
  Program prog;
  std::array<Instruction, 32> instructions;
  decode_into(space, id, instructions.data());
  const std::size_t entries = 2 * static_cast<std::size_t>(space.states);
  for (std::size_t e = 0; e < entries; ++e) {
    prog.write[e] = static_cast<std::int8_t>(instructions[e].write);
    prog.move[e] = static_cast<std::int8_t>(instructions[e].move);
    prog.next[e] = static_cast<std::int8_t>(instructions[e].next_state);
    if (instructions[e].next_state < 0) prog.can_halt = true;
  }
  return prog;
}

// Tape simulator reused across machines; only touched cells are cleared.
class TapeRunner {
 public:
  explicit TapeRunner(int max_steps)
      : max_steps_(max_steps), tape_(2 * static_cast<std::size_t>(max_steps) + 3, 0) {}

  MachineRun run(const MachineSpace& space, std::uint64_t id) {
    MachineRun result;
    result.machine_id = id;
    const Program prog = compile(space, id);
    if (!prog.can_halt) {
      result.steps = max_steps_;
      return result;
    }
    const int origin = max_steps_ + 1;
    int head = origin, lo = origin, hi = origin, state = 0;
    bool halted = false;
    int step = 0;
    while (step < max_steps_) {
      ++step;
      const int idx = state * 2 + tape_[head];
      lo = std::min(lo, head);
      hi = std::max(hi, head);
      tape_[head] = static_cast<Bit>(prog.write[idx]);
      if (prog.next[idx] < 0) {
        halted = true;
        break;
      }
      head += prog.move[idx];
      state = prog.next[idx];
    }
    result.steps = step;
    if (halted) {
      const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
      if (len > Pattern::kMaxLength1d) {
        result.outcome = RunOutcome::discarded;
      } else {
        result.outcome = RunOutcome::halted;
        result.output = Pattern::line(std::span<const Bit>(&tape_[lo], len));
      }
    }
    std::fill(tape_.begin() + lo, tape_.begin() + hi + 1, Bit{0});
    return result;
  }

 private:
  int max_steps_;
  std::vector<Bit> tape_;
};

// Plane simulator; moves are up, down, left, right.
class PlaneRunner {
 public:
  explicit PlaneRunner(int max_steps)
      : max_steps_(max_steps),
        side_(2 * static_cast<std::size_t>(max_steps) + 3),
        plane_(side_ * side_, 0) {}

  MachineRun run(const MachineSpace& space, std::uint64_t id) {
    static constexpr int kDr[4] = {-1, 1, 0, 0};
    static constexpr int kDc[4] = {0, 0, -1, 1};
    MachineRun result;
    result.machine_id = id;
    const Program prog = compile(space, id);
    if (!prog.can_halt) {
      result.steps = max_steps_;
      return result;
    }
    const int origin = max_steps_ + 1;
    int r = origin, c = origin, state = 0;
    int rlo = r, rhi = r, clo = c, chi = c;
    bool halted = false;
    int step = 0;
    while (step < max_steps_) {
      ++step;
      Bit& cell = plane_[static_cast<std::size_t>(r) * side_ + static_cast<std::size_t>(c)];
      const int idx = state * 2 + cell;
      rlo = std::min(rlo, r);
      rhi = std::max(rhi, r);
      clo = std::min(clo, c);
      chi = std::max(chi, c);
      cell = static_cast<Bit>(prog.write[idx]);
      if (prog.next[idx] < 0) {
        halted = true;
        break;
      }
      r += kDr[prog.move[idx]];
      c += kDc[prog.move[idx]];
      state = prog.next[idx];
    }
    result.steps = step;
    const std::size_t rows = static_cast<std::size_t>(rhi - rlo + 1);
    const std::size_t cols = static_cast<std::size_t>(chi - clo + 1);
    if (halted) {
      if (rows > Pattern::kBlockSide || cols > Pattern::kBlockSide) {
        result.outcome = RunOutcome::discarded;
      } else {
        std::vector<Bit> cells;
        cells.reserve(rows * cols);
        for (int rr = rlo; rr <= rhi; ++rr) {
          for (int cc = clo; cc <= chi; ++cc) {
            cells.push_back(plane_[static_cast<std::size_t>(rr) * side_ + static_cast<std::size_t>(cc)]);
          }
        }
        result.outcome = RunOutcome::halted;
        result.output = Pattern::block(rows, cols, cells);
      }
    }
    for (int rr = rlo; rr <= rhi; ++rr) {
      auto row = plane_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(rr) * side_);
      std::fill(row + clo, row + chi + 1, Bit{0});
    }
    return result;
  }

 private:
  int max_steps_;
  std::size_t side_;
  std::vector<Bit> plane_;
};

void check_range(const MachineSpace& space, std::uint64_t begin, std::uint64_t end) {
  space.validate();
  if (begin > end || end > space.machine_count()) {
    throw std::invalid_argument("enumerate: id range outside the machine space");
  }
}

std::uint64_t parse_u64(std::string_view text, const char* what) {
  std::uint64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw FormatError(std::string("CTM table: malformed ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void MachineSpace::validate() const {
  if (dims != 1 && dims != 2) throw std::invalid_argument("MachineSpace: dims must be 1 or 2");
  if (states < 1) throw std::invalid_argument("MachineSpace: states must be >= 1");
  if (states > 16) throw std::invalid_argument("MachineSpace: states must be <= 16");
  if (max_steps < 1) throw std::invalid_argument("MachineSpace: max_steps must be >= 1");
  // The id space must fit in 64 bits.
  long double total = std::pow(static_cast<long double>(instructions_per_entry()), 2.0L * states);
  if (total >= 1.8e19L) throw std::invalid_argument("MachineSpace: enumeration too large");
}

std::uint64_t MachineSpace::instructions_per_entry() const {
  const auto n = static_cast<std::uint64_t>(states);
  // 1D: write x {left, right} x next state, plus two halting writes.
  // 2D: write x {up, down, left, right} x (next state or halt).
  return dims == 1 ? 4 * n + 2 : 8 * (n + 1);
}

std::uint64_t MachineSpace::machine_count() const {
  const std::uint64_t base = instructions_per_entry();
  std::uint64_t total = 1;
  for (int e = 0; e < 2 * states; ++e) total *= base;
  return total;
}

Pattern Pattern::line(std::span<const Bit> bits) {
  if (bits.empty() || bits.size() > kMaxLength1d) {
    throw std::invalid_argument("Pattern: 1D length must be in [1, 16]");
  }
  return Pattern(1, line_key(bits));
}

Pattern Pattern::line(std::string_view bits) {
  const BitSignal parsed = BitSignal::parse(bits);
  if (parsed.size() != bits.size()) throw std::invalid_argument("Pattern: expected only 0/1");
  return line(parsed.bits());
}

Pattern Pattern::block(std::size_t rows, std::size_t cols, std::span<const Bit> cells) {
  if (rows == 0 || cols == 0 || rows > kBlockSide || cols > kBlockSide) {
    throw std::invalid_argument("Pattern: 2D block sides must be in [1, 4]");
  }
  if (cells.size() != rows * cols) throw std::invalid_argument("Pattern: cell count mismatch");
  std::uint32_t key = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (cells[r * cols + c]) key |= std::uint32_t{1} << (15 - (r * 4 + c));
    }
  }
  return Pattern(2, key);
}

Pattern Pattern::block(std::string_view cells16) {
  const BitSignal parsed = BitSignal::parse(cells16);
  if (cells16.size() != 16 || parsed.size() != 16) {
    throw std::invalid_argument("Pattern: a 4x4 block needs exactly 16 0/1 characters");
  }
  return block(4, 4, parsed.bits());
}

Pattern Pattern::from_key(int dims, std::uint32_t key) {
  if (dims == 1) {
    if (key < 2 || key >= kDense1d) throw std::invalid_argument("Pattern: bad 1D key");
  } else if (dims == 2) {
    if (key > 0xFFFFu) throw std::invalid_argument("Pattern: bad 2D key");
  } else {
    throw std::invalid_argument("Pattern: dims must be 1 or 2");
  }
  return Pattern(dims, key);
}

std::size_t Pattern::length() const {
  return dims_ == 2 ? 16 : static_cast<std::size_t>(key_length_1d(key_));
}

Pattern Pattern::complement() const {
  return Pattern(dims_, complement_key(dims_, key_));
}

std::string Pattern::to_string() const {
  const std::size_t len = length();
  std::string out(len, '0');
  for (std::size_t i = 0; i < len; ++i) {
    if ((key_ >> (len - 1 - i)) & 1u) out[i] = '1';
  }
  return out;
}

std::vector<Instruction> decode_machine(const MachineSpace& space, std::uint64_t id) {
  space.validate();
  std::vector<Instruction> out(2 * static_cast<std::size_t>(space.states));
  if (decode_into(space, id, out.data()) != 0) {
    throw std::invalid_argument("decode_machine: id outside the machine space");
  }
  return out;
}

MachineRun run_machine(const MachineSpace& space, std::uint64_t id) {
  check_range(space, id, id + 1);
  if (space.dims == 1) return TapeRunner(space.max_steps).run(space, id);
  return PlaneRunner(space.max_steps).run(space, id);
}

void enumerate_1d(const MachineSpace& space, std::uint64_t begin, std::uint64_t end,
                  const RunVisitor& visit) {
  if (space.dims != 1) throw std::invalid_argument("enumerate_1d: space is not 1D");
  check_range(space, begin, end);
  TapeRunner runner(space.max_steps);
  for (std::uint64_t id = begin; id < end; ++id) visit(runner.run(space, id));
}

void enumerate_1d(const MachineSpace& space, const RunVisitor& visit) {
  enumerate_1d(space, 0, space.machine_count(), visit);
}

void enumerate_2d(const MachineSpace& space, std::uint64_t begin, std::uint64_t end,
                  const RunVisitor& visit) {
  if (space.dims != 2) throw std::invalid_argument("enumerate_2d: space is not 2D");
  check_range(space, begin, end);
  PlaneRunner runner(space.max_steps);
  for (std::uint64_t id = begin; id < end; ++id) visit(runner.run(space, id));
}

void enumerate_2d(const MachineSpace& space, const RunVisitor& visit) {
  enumerate_2d(space, 0, space.machine_count(), visit);
}

CtmTable::CtmTable(MachineSpace space, std::vector<std::pair<Pattern, std::uint64_t>> counts,
                   std::uint64_t total_machines, std::uint64_t total_halting)
    : space_(space), total_machines_(total_machines), total_halting_(total_halting) {
  space_.validate();
  if (total_halting_ == 0) throw Error("CTM table: no halting outputs (degenerate space)");
  if (total_halting_ > total_machines_) {
    throw Error("CTM table: total_halting exceeds total_machines");
  }
  std::uint64_t sum = 0;
  entries_.reserve(counts.size());
  for (const auto& [pattern, count] : counts) {
    if (pattern.dims() != space_.dims) throw Error("CTM table: pattern dimensionality mismatch");
    if (count == 0) throw Error("CTM table: zero count for " + pattern.to_string());
    sum += count;
    entries_.push_back({pattern, count, 0.0});
  }
  if (sum != total_halting_) {
    throw Error("CTM table: counts sum to " + std::to_string(sum) + ", header says " +
                std::to_string(total_halting_));
  }
  std::sort(entries_.begin(), entries_.end(), [](const CtmEntry& a, const CtmEntry& b) {
    return a.pattern.to_string() < b.pattern.to_string();
  });
  dense_.assign(dense_size(space_.dims), -1.0);
  const double total = static_cast<double>(total_halting_);
  for (auto& entry : entries_) {
    if (dense_[entry.pattern.key()] >= 0) {
      throw Error("CTM table: duplicate pattern " + entry.pattern.to_string());
    }
    entry.complexity = -std::log2(static_cast<double>(entry.count) / total);
    dense_[entry.pattern.key()] = entry.complexity;
    max_entry_ = std::max(max_entry_, entry.complexity);
  }
}

std::optional<std::uint64_t> CtmTable::count(const Pattern& p) const {
  if (p.dims() != dims()) return std::nullopt;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), p.to_string(),
                             [](const CtmEntry& e, const std::string& s) {
                               return e.pattern.to_string() < s;
                             });
  if (it == entries_.end() || !(it->pattern == p)) return std::nullopt;
  return it->count;
}

CtmLookup CtmTable::lookup(const Pattern& p) const {
  if (p.dims() != dims()) {
    throw std::invalid_argument("CTM lookup: pattern is " + std::to_string(p.dims()) +
                                "D, table is " + std::to_string(dims()) + "D");
  }
  return lookup_key(p.key());
}

bool operator==(const CtmTable& a, const CtmTable& b) {
  if (!(a.space_ == b.space_) || a.total_machines_ != b.total_machines_ ||
      a.total_halting_ != b.total_halting_ || a.entries_.size() != b.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (!(a.entries_[i].pattern == b.entries_[i].pattern) ||
        a.entries_[i].count != b.entries_[i].count) {
      return false;
    }
  }
  return true;
}

CtmTable build_table(const MachineSpace& space, unsigned threads, BuildStats* stats) {
  space.validate();
  const std::uint64_t total = space.machine_count();
  const std::size_t dense = dense_size(space.dims);

  struct Partial {
    std::vector<std::uint64_t> counts;
    BuildStats stats;
  };
  // A fixed number of slices keeps the merge independent of thread count.
  const std::size_t slices = std::min<std::uint64_t>(total, 64);
  std::vector<Partial> partials(slices);
  parallel_for(slices, threads, [&](std::size_t slice) {
    Partial& part = partials[slice];
    part.counts.assign(dense, 0);
    const std::uint64_t begin = total * slice / slices;
    const std::uint64_t end = total * (slice + 1) / slices;
    auto visit = [&](const MachineRun& run) {
      ++part.stats.machines;
      switch (run.outcome) {
        case RunOutcome::halted: {
          ++part.stats.halting;
          const std::uint32_t key = run.output->key();
          ++part.counts[key];
          ++part.counts[complement_key(space.dims, key)];
          break;
        }
        case RunOutcome::discarded:
          ++part.stats.discarded;
          break;
        case RunOutcome::nonhalting:
          ++part.stats.nonhalting;
          break;
      }
    };
    if (space.dims == 1) {
      enumerate_1d(space, begin, end, visit);
    } else {
      enumerate_2d(space, begin, end, visit);
    }
  });

  std::vector<std::uint64_t> counts(dense, 0);
  BuildStats merged;
  for (const auto& part : partials) {
    for (std::size_t k = 0; k < dense; ++k) counts[k] += part.counts[k];
    merged.machines += part.stats.machines;
    merged.halting += part.stats.halting;
    merged.discarded += part.stats.discarded;
    merged.nonhalting += part.stats.nonhalting;
  }
  if (stats) *stats = merged;
  if (merged.halting == 0) {
    throw std::runtime_error("build_table: no machine halted with a tallied output");
  }

  std::vector<std::pair<Pattern, std::uint64_t>> entries;
  for (std::size_t k = 0; k < dense; ++k) {
    if (counts[k] != 0) {
      entries.emplace_back(Pattern::from_key(space.dims, static_cast<std::uint32_t>(k)), counts[k]);
    }
  }
  return CtmTable(space, std::move(entries), 2 * merged.machines, 2 * merged.halting);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string serialize_table(const CtmTable& table) {
  std::string body;
  for (const auto& entry : table.entries()) {
    body += entry.pattern.to_string();
    body += ',';
    body += std::to_string(entry.count);
    body += '\n';
  }
  const auto& space = table.space();
  std::ostringstream out;
  out << "CTMv1 dims=" << space.dims << " states=" << space.states
      << " symbols=" << MachineSpace::kSymbols << " max_steps=" << space.max_steps
      << " total_machines=" << table.total_machines()
      << " total_halting=" << table.total_halting() << '\n';
  out << "sha256=" << sha256_hex(body) << '\n';
  out << body;
  return out.str();
}

CtmTable parse_table(std::string_view text) {
  const auto first_nl = text.find('\n');
  if (first_nl == std::string_view::npos) throw FormatError("CTM table: missing header line");
  const auto second_nl = text.find('\n', first_nl + 1);
  if (second_nl == std::string_view::npos) throw FormatError("CTM table: missing checksum line");
  const std::string header(text.substr(0, first_nl));
  const std::string_view checksum_line = text.substr(first_nl + 1, second_nl - first_nl - 1);
  const std::string_view body = text.substr(second_nl + 1);

  std::istringstream tokens(header);
  std::string magic;
  tokens >> magic;
  if (magic.rfind("CTMv", 0) != 0) throw FormatError("CTM table: bad magic '" + magic + "'");
  if (magic != "CTMv1") throw FormatError("CTM table: unsupported version '" + magic + "'");
  std::map<std::string, std::uint64_t> fields;
  for (std::string tok; tokens >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("CTM table: malformed header field '" + tok + "'");
    fields[tok.substr(0, eq)] = parse_u64(std::string_view(tok).substr(eq + 1), "header value");
  }
  for (const char* key : {"dims", "states", "symbols", "max_steps", "total_machines", "total_halting"}) {
    if (!fields.count(key)) throw FormatError(std::string("CTM table: header lacks ") + key);
  }
  if (fields["symbols"] != MachineSpace::kSymbols) throw FormatError("CTM table: symbols must be 2");
  if (fields["states"] > 16 || fields["max_steps"] > 1'000'000'000) {
    throw FormatError("CTM table: header values out of range");
  }

  if (checksum_line.rfind("sha256=", 0) != 0) throw FormatError("CTM table: missing sha256 line");
  if (checksum_line.substr(7) != sha256_hex(body)) {
    throw ChecksumError("CTM table: body checksum mismatch");
  }

  MachineSpace space{static_cast<int>(fields["dims"]), static_cast<int>(fields["states"]),
                     static_cast<int>(fields["max_steps"])};
  try {
    space.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("CTM table: ") + e.what());
  }

  std::vector<std::pair<Pattern, std::uint64_t>> entries;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const std::string_view line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("CTM table: malformed entry '" + std::string(line) + "'");
    }
    const std::string_view pattern = line.substr(0, comma);
    const std::uint64_t count = parse_u64(line.substr(comma + 1), "count");
    try {
      entries.emplace_back(space.dims == 1 ? Pattern::line(pattern) : Pattern::block(pattern), count);
    } catch (const std::invalid_argument& e) {
      throw FormatError("CTM table: bad pattern '" + std::string(pattern) + "': " + e.what());
    }
  }
  try {
    return CtmTable(space, std::move(entries), fields["total_machines"], fields["total_halting"]);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
}

void save_table(const CtmTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::string text = serialize_table(table);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing " + path.string());
}

CtmTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CTM table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

}  // namespace dimsig
