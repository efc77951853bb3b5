#pragma once

#include <stdexcept>
#include <string>

namespace emogait {

enum class ErrorKind {
  Usage,    // bad command line / bad API call
  Parse,    // unreadable file content
  Schema,   // readable content violating a format contract
  Mapping,  // incomplete or inconsistent joint map
  Cycle,    // walk-cycle detection failure
  Data,     // semantically invalid data (bad ids, empty corpora, ...)
  Io,       // filesystem failures
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace emogait
