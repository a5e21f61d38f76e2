#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sagd {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NotStronglyConvex : public Error {
 public:
  using Error::Error;
};

/// An iterative reference solve stopped at its iteration cap.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double achieved_grad_norm)
      : Error(what), achieved_grad_norm_(achieved_grad_norm) {}

  double achieved_grad_norm() const { return achieved_grad_norm_; }

 private:
  double achieved_grad_norm_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EnumerationLimit : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sagd
