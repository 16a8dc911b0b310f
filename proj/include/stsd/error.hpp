#pragma once

#include <stdexcept>
#include <string>

namespace stsd {

enum class ErrorCode {
  invalid_argument,
  unsupported,
  rank_deficient,
  too_large,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stsd
