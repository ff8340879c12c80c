#pragma once

#include <stdexcept>
#include <string>

namespace bae {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad physical parameters or config values
struct ValidationError : Error {
    using Error::Error;
};

// linear response evaluated on (or within 1e-12 gamma of) a pole
struct PoleError : Error {
    using Error::Error;
};

// closed form needs |A+| == |A-|
struct AsymmetricPumpError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct PerturbationError : Error {
    using Error::Error;
};

struct RootFindError : Error {
    using Error::Error;
};

struct StepSizeError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

struct PoorFitError : Error {
    using Error::Error;
};

struct InstabilityHalt : Error {
    InstabilityHalt(const std::string& what, double rate, double time)
        : Error(what), growth_rate(rate), halt_time(time) {}
    double growth_rate;  // 1/s, positive = growing
    double halt_time;
};

}  // namespace bae
