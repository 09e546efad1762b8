#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace devrec {

enum class Errc {
    AllBackground,
    NoForeground,
    OutOfBounds,
    InvalidArgument,
    InvalidSizes,
    DimensionMismatch,
    EmptyDataset,
    FormatError,
    VersionMismatch,
    AllZeroAccuracies,
    LengthMismatch,
    BadK,
    TooFewSamples,
    TooFewClasses,
    UnreadableImage,
    IoError,
};

constexpr std::string_view to_string(Errc e) noexcept {
    switch (e) {
    case Errc::AllBackground: return "AllBackground";
    case Errc::NoForeground: return "NoForeground";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidSizes: return "InvalidSizes";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::FormatError: return "FormatError";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::AllZeroAccuracies: return "AllZeroAccuracies";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BadK: return "BadK";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::TooFewClasses: return "TooFewClasses";
    case Errc::UnreadableImage: return "UnreadableImage";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying its Errc.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace devrec
