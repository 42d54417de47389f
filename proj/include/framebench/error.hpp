#pragma once

#include <stdexcept>
#include <string>

namespace framebench {

enum class ErrorKind {
  Invalid,     // argument or precondition violation
  Corpus,      // malformed or inconsistent corpus data
  Parse,       // unreadable record or file
  Conflict,    // append-only store rejected a differing value
  Dependency,  // a pipeline stage is missing its inputs
  Usage,       // bad command line or configuration
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace framebench
