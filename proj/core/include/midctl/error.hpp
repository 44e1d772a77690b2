#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace midctl {

enum class ErrorCode {
  kSchema,
  kParse,
  kValidation,
  kInsufficientData,
  kDimension,
  kNumerical,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as midctl::Error; the code is stable and
// machine-readable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace midctl
