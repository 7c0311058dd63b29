// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dtfuse/plane.hpp"

namespace dtfuse {

enum class FrameFormat { PgmSequence, RawY8 };

FrameFormat parse_frame_format(std::string_view s);

// Decodes one or more concatenated binary (P5, maxval 255) images from a byte
// buffer. Errors carry the byte offset of the offending token.
std::vector<Frame> decode_pgm(std::string_view bytes);
// Splits a raw 8-bit luma stream into width x height frames.
std::vector<Frame> decode_raw_y8(std::string_view bytes, int width, int height);

// A directory is read as its *.pgm files in name order. Dimensions must agree
// across the sequence.
std::vector<Frame> load_frames(const std::filesystem::path& path, FrameFormat format, int width = 0, int height = 0);

// Clamps to [0, 255] and rounds half away from zero.
std::string encode_pgm(const Frame& f);
void write_pgm(const std::filesystem::path& path, const Frame& f);

}  // namespace dtfuse
