#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpaint {

enum class ErrorCode {
    MissingKey,
    MalformedNumber,
    SingularIntrinsics,
    ZeroRadius,
    DimensionMismatch,
    LayoutMismatch,
    InvalidArgument,
    MissingInput,
    Format,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code),
          detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace vpaint
