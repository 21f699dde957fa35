// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdrlpa {

/// Malformed or unreadable input: files, configs, command-line values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure inside a binary raster file. Carries the byte offset.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Dimension or count mismatch between frames, calibration data and configs.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sensor or reconstruction parameters.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerically degenerate data, e.g. a flat field too dark to calibrate from.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by baselines that cannot operate on misaligned rigs.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hdrlpa
