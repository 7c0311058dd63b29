// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <stdexcept>
#include <string>

namespace dtfuse {

// Engine buffer too small for the requested line.
class CapacityExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotCalibrated : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationFailed : public std::runtime_error {
public:
    CalibrationFailed(const std::string& what, std::string report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const std::string& report() const noexcept { return report_; }

private:
    std::string report_;
};

class ExtrapolationRefused : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Malformed input file. offset is the byte position of the problem.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dtfuse
