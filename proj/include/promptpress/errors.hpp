#pragma once

#include <stdexcept>
#include <string>

namespace promptpress {

// Error categories map 1:1 onto CLI exit codes (see tools/promptpress.cpp).

/// Input file missing or unreadable.
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

/// Record file violates the expected line-delimited schema. Messages name
/// the offending line number and, where known, the doc_id.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Parameter outside a module's precondition.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Chat endpoint failure that survived the retry policy.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace promptpress
