#pragma once

#include <stdexcept>
#include <string>

namespace kmech {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A formula was evaluated where a denominator (or Ck) vanishes.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A state violates the domain of its own chart.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A valid point cannot be represented in the requested chart.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Square root of a negative quantity (E_kappa on the hyperbolic plane).
class NegativeRadicandError : public Error {
public:
    using Error::Error;
};

/// Division by a vanishing E_kappa while extracting real integrals.
class ZeroEnergyError : public Error {
public:
    using Error::Error;
};

/// Bad parameters or incompatible system/integral combinations.
class SpecError : public Error {
public:
    using Error::Error;
};

/// A rejection sampler could not find enough admissible states.
class SamplerExhaustedError : public Error {
public:
    using Error::Error;
};

/// closure_detect was given a trajectory without enough candidate returns.
class HorizonError : public Error {
public:
    using Error::Error;
};

}  // namespace kmech
