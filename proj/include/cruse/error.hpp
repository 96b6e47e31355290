#pragma once

#include <stdexcept>
#include <string>

namespace cruse {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value (window length, model spec, loss weights).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operand shapes or lengths disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed text input: model names, manifests, CSV files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Binary container problems: WAV files, weight bundles.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A signal has no usable content (silent, all-zero RIR).
class SignalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cruse
