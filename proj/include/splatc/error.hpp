#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace splatc {

enum class ErrorCode : std::uint8_t {
    NonFinite,
    DimensionMismatch,
    SingularCovariance,
    MixedDimensions,
    NonFiniteLoss,
    InvalidConfig,
    OutOfRange,
    BadMagic,
    UnsupportedVersion,
    TruncatedPayload,
    SizeMismatch,
    UnknownName,
    ChecksumMismatch,
    FetchFailed,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code, plus the offending element
/// index where one applies (splat index, iteration, parameter slot).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::optional<std::size_t> index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

} // namespace splatc
