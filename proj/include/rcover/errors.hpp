#ifndef RCOVER_ERRORS_HPP
#define RCOVER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rcover {

/// Input violates a documented precondition (bad dimension, exponent out of range, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An estimator refuses to run because its variance would be infinite.
class RefusedEstimate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The point set handed to a dimension estimate is empty.
class EmptySetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Subsequence selection could not reach the requested number of dyadic levels.
class SelectionExhausted : public std::runtime_error {
public:
    SelectionExhausted(const std::string& what, int levels)
        : std::runtime_error(what), levels_reached(levels) {}
    int levels_reached;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) {
        throw DomainError(msg);
    }
}

} // namespace detail

} // namespace rcover

#endif
