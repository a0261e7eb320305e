#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace auq {

// Error categories; they map one-to-one onto the C API status codes.
enum class ErrorKind {
  argument,  // bad argument to a library call
  data,      // malformed dataset contents
  io,        // file read/write failure
  config,    // experiment config parse or validation failure
  solver,    // solver abort (non-finite iterates, broken invariant)
  oracle,    // loss oracle produced garbage (non-finite value/gradient)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

}  // namespace auq
