#include "splatc/error.hpp"

namespace splatc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::MixedDimensions: return "MixedDimensions";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::FetchFailed: return "FetchFailed";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message, std::optional<std::size_t> index) {
    std::string out{to_string(code)};
    if (index) {
        out += "(" + std::to_string(*index) + ")";
    }
    if (!message.empty()) {
        out += ": " + message;
    }
    return out;
}
} // namespace

Error::Error(ErrorCode code, std::string message, std::optional<std::size_t> index)
    : std::runtime_error(decorate(code, message, index)), code_(code), index_(index) {}

} // namespace splatc
