#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ricescope {

enum class ErrorCode {
    REJECTED_COMBINATION,
    DIMENSION_MISMATCH,
    PARSE_ERROR,
    BRANCH_MISMATCH,
    OUT_OF_BOUNDS_BOX,
    EMPTY_INPUT,
    MISSING_TYPE,
    DUPLICATE_TYPE,
    NONPOSITIVE_INPUT,
    NONPOSITIVE_AREA,
    PLACEMENT_FAILURE,
    SCALE_MISMATCH,
    CONFIG_ERROR,
    IO_ERROR,
    INVALID_ARGUMENT,
};

inline const char* to_cstr(ErrorCode code) {
    switch (code) {
    case ErrorCode::REJECTED_COMBINATION: return "REJECTED_COMBINATION";
    case ErrorCode::DIMENSION_MISMATCH:   return "DIMENSION_MISMATCH";
    case ErrorCode::PARSE_ERROR:          return "PARSE_ERROR";
    case ErrorCode::BRANCH_MISMATCH:      return "BRANCH_MISMATCH";
    case ErrorCode::OUT_OF_BOUNDS_BOX:    return "OUT_OF_BOUNDS_BOX";
    case ErrorCode::EMPTY_INPUT:          return "EMPTY_INPUT";
    case ErrorCode::MISSING_TYPE:         return "MISSING_TYPE";
    case ErrorCode::DUPLICATE_TYPE:       return "DUPLICATE_TYPE";
    case ErrorCode::NONPOSITIVE_INPUT:    return "NONPOSITIVE_INPUT";
    case ErrorCode::NONPOSITIVE_AREA:     return "NONPOSITIVE_AREA";
    case ErrorCode::PLACEMENT_FAILURE:    return "PLACEMENT_FAILURE";
    case ErrorCode::SCALE_MISMATCH:       return "SCALE_MISMATCH";
    case ErrorCode::CONFIG_ERROR:         return "CONFIG_ERROR";
    case ErrorCode::IO_ERROR:             return "IO_ERROR";
    case ErrorCode::INVALID_ARGUMENT:     return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

/// Exception carrying a machine-readable error code. Every failure raised by
/// the library is one of these; the CLI maps codes onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_cstr(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ricescope
