#pragma once

#include <stdexcept>
#include <string>

namespace valueprobe {

// Failure classes, each mapped to a distinct process exit code by the CLI.
enum class ErrorKind { config, io, network, validation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& message) { return Error(ErrorKind::config, message); }
inline Error io_error(const std::string& message) { return Error(ErrorKind::io, message); }
inline Error network_error(const std::string& message) { return Error(ErrorKind::network, message); }
inline Error validation_error(const std::string& message) {
  return Error(ErrorKind::validation, message);
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::network: return 4;
    case ErrorKind::validation: return 5;
  }
  return 1;
}

}  // namespace valueprobe
