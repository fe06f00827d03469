#pragma once

#include <stdexcept>
#include <string>

namespace fal {

// Error categories; the CLI maps each category to a distinct exit code.
enum class ErrorCategory { config = 2, contract = 3, protocol = 4, io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), category_(cat) {}
    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

// Bad user-supplied configuration (dimensions, ranges, file schema).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorCategory::config, msg) {}
};

// A caller broke an operation's contract (shape mismatch, empty batch).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(ErrorCategory::contract, msg) {}
};

// Round/epoch machinery driven out of order, or an invariant broke mid-run.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(ErrorCategory::protocol, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorCategory::io, msg) {}
};

// Cosine similarity is undefined for (near-)zero feature vectors.
class DegenerateFeatureError : public ContractError {
public:
    explicit DegenerateFeatureError(const std::string& msg) : ContractError(msg) {}
};

}  // namespace fal
