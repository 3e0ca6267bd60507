#pragma once

#include <stdexcept>
#include <string>

namespace lfpb {

enum class ErrorKind {
  usage,
  io,
  data,
  backend_spawn,
  backend_exit,
  backend_timeout,
  backend_dims,
  backend_format,
};

/// Base class for every error raised by the library. The kind drives the
/// status code reported through the C API and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class BackendError : public Error {
 public:
  BackendError(ErrorKind kind, const std::string& what, std::string stderr_text = {})
      : Error(kind, what), stderr_text_(std::move(stderr_text)) {}
  const std::string& stderr_text() const noexcept { return stderr_text_; }

 private:
  std::string stderr_text_;
};

}  // namespace lfpb
