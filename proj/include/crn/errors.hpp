#pragma once
#include <stdexcept>
#include <string>

namespace crn {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mathematically invalid input (out-of-range probability, H <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A harvesting ratio outside its feasible interval, or an empty interval.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// An iterative numeric routine failed to reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed config / scenario file. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Brute-force instance exceeds the enforced desk-scale bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace crn
