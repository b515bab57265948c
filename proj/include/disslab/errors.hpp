#pragma once

#include <stdexcept>
#include <string>

namespace disslab {

// Exit-code classes of the command line surface.
enum class ErrorKind { check = 1, config = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string code, const std::string &what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}
  ErrorKind kind() const { return kind_; }
  const std::string &code() const { return code_; }
  int exit_code() const { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail_config(const std::string &code, const std::string &msg) {
  throw Error(ErrorKind::config, code, msg);
}
[[noreturn]] inline void fail_numeric(const std::string &code, const std::string &msg) {
  throw Error(ErrorKind::numerical, code, msg);
}
[[noreturn]] inline void fail_check(const std::string &code, const std::string &msg) {
  throw Error(ErrorKind::check, code, msg);
}

} // namespace disslab
