#pragma once

#include <stdexcept>
#include <string>

namespace savanna {

// Domain-specific failures. Precondition violations on plain inputs use
// std::invalid_argument directly; these carry a contract meaning of their own.

struct RateInvalid : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the coupled engine when the domination invariant breaks.
// Never expected in a correct build; it signals an engine bug.
struct CouplingViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct NoFeasibleConstants : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LambdaTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct HypothesisFails : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridTooCoarse : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvariantBreach : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PopulationExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigInvalid : std::runtime_error {
    std::string field;
    ConfigInvalid(std::string field_path, const std::string& what)
        : std::runtime_error("[" + field_path + "] " + what), field(std::move(field_path)) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PartialFailure : std::runtime_error {
    int failed = 0;
    PartialFailure(int n, const std::string& what) : std::runtime_error(what), failed(n) {}
};

}  // namespace savanna
