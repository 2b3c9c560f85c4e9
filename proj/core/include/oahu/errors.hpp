#pragma once

#include <stdexcept>
#include <string>

namespace oahu {

// Base of every error thrown by the library. The subclasses only exist so
// callers (and tests) can tell failure categories apart.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error("invalid config field '" + field + "': " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DimensionError : public Error { using Error::Error; };
class InputError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };

// Checkpoint problems: wrong magic/version vs. a payload that ends early.
class FormatError : public Error { using Error::Error; };
class CorruptionError : public Error { using Error::Error; };

class GenerationError : public Error { using Error::Error; };
class CacheError : public Error { using Error::Error; };
class LoadError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };

}  // namespace oahu
