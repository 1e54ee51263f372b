#pragma once

#include <stdexcept>
#include <string>

namespace ctm {

// Base of every error thrown by the library. Subclasses name the failure
// category so callers (and tests) can discriminate without parsing text.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A gist payload exceeds the configured size limit.
class SizeViolation : public Error {
public:
    using Error::Error;
};

// A precondition on a value was broken (negative coin-flip input, self-ack, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Invalid machine or tree configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class EmptyMachine : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Sibling chunks at a tree node belong to different competitions.
class PipelineDesync : public Error {
public:
    using Error::Error;
};

// Query made before the pipeline delivered any real broadcast.
class WarmupError : public Error {
public:
    using Error::Error;
};

// Scenario file could not be parsed or failed validation.
class ScenarioError : public Error {
public:
    using Error::Error;
};

// I/O failure while running; carries the last tick that completed.
class RunError : public Error {
public:
    RunError(const std::string& what, long long last_completed_tick)
        : Error(what), last_completed_tick_(last_completed_tick) {}
    long long last_completed_tick() const noexcept { return last_completed_tick_; }

private:
    long long last_completed_tick_;
};

} // namespace ctm
