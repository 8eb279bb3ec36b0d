#pragma once

#include <stdexcept>
#include <string>

namespace stochdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration, detected before any compute.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A model assumption or sufficient condition does not hold
/// (discount range, kernel regime, drift inequality, growth condition...).
class ConditionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, empty feasible sets, failed quadrature and the like.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A series or iteration whose terms stopped decreasing.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace stochdp

namespace stochdp {

/// Runs f and prefixes the message of any library error with the stage name, keeping its type.
template <class F>
decltype(auto) staged(const std::string& stage, F&& f) {
    try {
        return f();
    } catch (const DivergenceError& e) {
        throw DivergenceError(stage + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(stage + ": " + e.what());
    } catch (const ConditionError& e) {
        throw ConditionError(stage + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(stage + ": " + e.what());
    }
}

}  // namespace stochdp
