#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace kosr {

using VertexId = std::uint32_t;
using CategoryId = std::uint32_t;
/// Path costs are exact 64-bit integers; every input weight is an integer.
using Cost = std::int64_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

enum class ErrorCode {
    parse_error,
    negative_weight,
    invalid_argument,
    insufficient_vertices,
    unknown_category,
    unknown_vertex,
    unreachable,
    enumeration_limit,
    io_error,
    format_error,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::negative_weight: return "NegativeWeight";
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::insufficient_vertices: return "InsufficientVertices";
        case ErrorCode::unknown_category: return "UnknownCategory";
        case ErrorCode::unknown_vertex: return "UnknownVertex";
        case ErrorCode::unreachable: return "Unreachable";
        case ErrorCode::enumeration_limit: return "EnumerationLimit";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::format_error: return "FormatError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kosr
