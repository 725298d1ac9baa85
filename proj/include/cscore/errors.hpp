#pragma once

#include <stdexcept>
#include <string>

namespace cscore {

// Base for every error raised on bad caller input. The CLI maps these to
// exit code 2; anything else escaping is an internal error (exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data (shape mismatch, misaligned inputs, NaN).
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

// A scalar parameter outside its admissible range (alpha <= 0, tau >= 1, ...).
class ParameterError : public InputError {
 public:
  using InputError::InputError;
};

// A CAM method was asked to run on a bundle lacking what it needs
// (gradients for the gradient-based methods, channel scores for ScoreCAM).
class MethodRequirementsError : public InputError {
 public:
  using InputError::InputError;
};

// Manifest / tensor file loading failures.
class LoadError : public InputError {
 public:
  using InputError::InputError;
};

// CSV parse failures. Messages carry the offending line number.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// Unreadable or unwritable output/input paths.
class IoError : public InputError {
 public:
  using InputError::InputError;
};

// A requested epoch / method / class is absent from a series.
class LookupError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace cscore
