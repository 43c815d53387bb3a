#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace survbias {

enum class ErrorCode {
    SchemaUnrecognized,
    FileUnreadable,
    EmptyFile,
    EmptyDate,
    EmptyWindow,
    DomainError,
    ZeroVolatility,
    WindowMismatch,
    InvalidConfig,
    InvalidInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (mainly the CLI) can map it to an exit status or a skip counter.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace survbias
