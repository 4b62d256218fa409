#pragma once

#include <stdexcept>
#include <string>

namespace bqpm {

// Base of the library error hierarchy.  Every error carries the process exit
// code the CLI maps it to: 1 internal, 2 bad input, 3 out of model validity,
// 4 iteration failed to converge, 5 file I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Arguments that violate a precondition (non-finite, wrong sign, wrong shape).
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Arguments outside the validity window of a fitted model (e.g. a Sellmeier
// fit evaluated past its tabulated wavelength range).
class RangeError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// An iterative routine exhausted its budget without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// Missing, unreadable, or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

// A projective element removed (essentially) all amplitude from a two-photon
// state, so renormalisation is meaningless.  Treated as caller error: the
// requested measurement chain is incompatible with the state.
class AnnihilationError : public InputError {
 public:
  using InputError::InputError;
};

// A least-squares fit whose solution is unusable (e.g. non-positive mean
// level when extracting a visibility).
class FitError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// A bootstrap whose resamples could not all be processed.
class BootstrapError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// Structural or semantic problems in a configuration file.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace bqpm
