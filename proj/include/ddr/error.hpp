#pragma once

#include <stdexcept>
#include <string>

namespace ddr {

// Base for every failure raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A value violated a documented invariant; the message names the field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ExhaustedAssetsError : public Error {
 public:
  using Error::Error;
};

class ComposeError : public Error {
 public:
  using Error::Error;
};

class FontError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddr
