// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtfuse/filter_bank.hpp"
#include "dtfuse/plane.hpp"

namespace dtfuse {

enum class EngineMode { LoadCoeffs, Forward, Inverse };

// Per-command cycle constants of the engine model.
struct EngineTiming {
    double cmd_overhead_cycles = 25.0;
    double xfer_in_cycles_per_word = 1.0;
    double xfer_out_cycles_per_word = 1.0;
    double pipeline_depth = 10.0;
};

// Cycle split of one line command. fill is the host-side transfer stage that
// double buffering can hide; engine is everything else.
struct CommandCycles {
    double fill = 0;
    double engine = 0;
    double total() const { return fill + engine; }
};

CommandCycles forward_command_cycles(const EngineTiming& t, std::size_t outwidth);
CommandCycles inverse_command_cycles(const EngineTiming& t, std::size_t outwidth);

// Words needed in the input/output buffer by one line command.
std::size_t forward_in_words(std::size_t outwidth);
std::size_t forward_out_words(std::size_t outwidth);
std::size_t inverse_in_words(std::size_t outwidth);
std::size_t inverse_out_words(std::size_t outwidth);

struct EngineState {
    static constexpr std::size_t kBufferWords = 4096;
    static constexpr std::size_t kAreaWords = 2048;

    Taps coeff_register_lp{};
    Taps coeff_register_hp{};
    Taps shift_register{};
    EngineMode mode = EngineMode::LoadCoeffs;
    std::vector<float> in_buffer = std::vector<float>(kBufferWords, 0.0f);
    std::vector<float> out_buffer = std::vector<float>(kBufferWords, 0.0f);
    std::uint64_t cycle_counter = 0;
    EngineTiming timing;
};

void load_coefficients(EngineState& s, std::span<const float> lp, std::span<const float> hp);

// Runs one forward line command. Input: 2*outwidth+12 words at in_area.
// Output: interleaved (hp, lp) pairs, 2*outwidth words at out_area.
// A command may run past the end of its area into the next one but never past
// the end of the buffer; otherwise CapacityExceeded. Returns modeled cycles,
// which are also added to cycle_counter.
std::uint64_t forward_line(EngineState& s, std::size_t in_area, std::size_t out_area, std::size_t outwidth);

// Synthesis counterpart. Input: outwidth interleaved (hp, lp) pairs.
// Output: 2*outwidth+12 words, the upsampled and filtered line in the same
// extended frame that forward_line consumed.
std::uint64_t inverse_line(EngineState& s, std::size_t in_area, std::size_t out_area, std::size_t outwidth);

enum class Direction { Forward, Inverse };

struct DriverResult {
    Plane plane;
    double cycles = 0;             // with ping-pong overlap
    double cycles_sequential = 0;  // same commands with no overlap
    double fill_cycles = 0;
    double engine_cycles = 0;
};

// Modeled total of `count` identical commands streamed through the two areas.
// When a single command does not fit in one area ping-pong is impossible and
// the commands run back to back.
double pipelined_cycles(const CommandCycles& c, std::size_t count, bool fits_area);

enum class PassScope { Separable, RowsOnly };

// One level through the engine. Separable: rows then columns (columns are
// transposed rows); forward output uses the quadrant layout [LL | HL ; LH | HH]
// with H = horizontal highpass, and inverse consumes it. RowsOnly: each row
// becomes [lo | hi] and back. Transformed dimensions must be even.
DriverResult driver_submit_plane(EngineState& s, const Plane& plane, Direction direction,
                                 const FilterPair& taps, PassScope scope = PassScope::Separable);

// Binary dump: "WENG", version u32, mode u32, cycle_counter u64, then lp, hp,
// shift register (12 float32 each) and both 4096-word buffers, little-endian.
std::vector<std::uint8_t> dump_engine_state(const EngineState& s);
EngineState load_engine_state(std::span<const std::uint8_t> bytes);

}  // namespace dtfuse
