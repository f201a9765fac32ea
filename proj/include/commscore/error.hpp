#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace commscore {

enum class ErrorKind {
    Parse,      // malformed input line
    Validation, // well-formed input violating a domain invariant
    NotFound,   // lookup of an unknown speaker / utterance
    Invariant,  // caller broke an operation precondition
    Argument,   // bad argument value (empty text, dimension mismatch, ...)
    Capability, // provider lacks a requested feature
    Transport,  // embedding backend unreachable or failing
    Batch,      // one or more batch elements failed
    Io,         // file system failure
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Invariant: return "invariant violation";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Capability: return "capability error";
    case ErrorKind::Transport: return "transport error";
    case ErrorKind::Batch: return "batch error";
    case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

/// Single exception type for the library. The kind selects the failure
/// class; optional fields carry location data (input line, batch positions).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(compose(kind, message)), kind_(kind), message_(std::move(message)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }

    /// Input line (1-based) for parse and validation errors raised by parsers.
    std::optional<std::size_t> line() const noexcept { return line_; }
    /// Failing element positions for batch errors.
    const std::vector<std::size_t>& positions() const noexcept { return positions_; }
    /// Transport failures may succeed on retry.
    bool retryable() const noexcept { return kind_ == ErrorKind::Transport; }

    Error& at_line(std::size_t line) {
        line_ = line;
        return refresh();
    }

    Error& at_positions(std::vector<std::size_t> positions) {
        positions_ = std::move(positions);
        return *this;
    }

    /// Copy of this error with a location prefix prepended to the message.
    Error with_context(std::string_view context) const {
        Error out = *this;
        out.message_ = std::string(context) + ": " + message_;
        return out.refresh();
    }

private:
    static std::string compose(ErrorKind kind, const std::string& message) {
        return std::string(to_string(kind)) + ": " + message;
    }

    Error& refresh() {
        std::string text = compose(kind_, message_);
        if (line_) text += " (line " + std::to_string(*line_) + ")";
        static_cast<std::runtime_error&>(*this) = std::runtime_error(text);
        return *this;
    }

    ErrorKind kind_;
    std::string message_;
    std::optional<std::size_t> line_;
    std::vector<std::size_t> positions_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string message) {
    throw Error(kind, std::move(message));
}

} // namespace commscore
