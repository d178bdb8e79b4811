#pragma once

#include <stdexcept>
#include <string>

namespace aif {

/// Bad input: malformed files, schema violations, out-of-range parameters.
/// The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Misconfiguration (unknown tokenizer, missing capacity map, bad config key).
class ConfigError : public ValidationError {
public:
    explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

/// LLM transport failures: exhausted retries, offline cache misses.
/// The CLI maps these to exit code 3.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Offline mode asked for a completion that is not in the cache.
class CacheMissError : public TransportError {
public:
    CacheMissError(const std::string& key, const std::string& msg)
        : TransportError(msg), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

}  // namespace aif
