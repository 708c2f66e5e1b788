// Exception hierarchy shared by every module. Callers that want exit codes
// catch cpa::Error for data problems and let anything else mean a bug.
#pragma once

#include <stdexcept>
#include <string>

namespace cpa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed input that breaks a documented invariant (e.g. two target verbs
// in one sentence). Message names the offending sentence where applicable.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// A lexicon/embedding/table lookup that cannot proceed (file missing, a
// feature asked for a resource that was never loaded, ...).
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpa
