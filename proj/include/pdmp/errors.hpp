#ifndef PDMP_ERRORS_HPP
#define PDMP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdmp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterOutOfRange : public Error {
public:
    using Error::Error;
};

// Flow inversion asked for a state the flow never reaches.
class Unreachable : public Error {
public:
    using Error::Error;
};

class SeriesDiverged : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

// The cumulative hazard stays below -log(u): the process would never jump.
class HazardExhausted : public Error {
public:
    explicit HazardExhausted(const std::string& msg, std::size_t jump_index = 0)
        : Error(msg), jump_index(jump_index) {}
    std::size_t jump_index;
};

class EmptySample : public Error {
public:
    using Error::Error;
};

class CoverageGap : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class NonMonotoneTime : public Error {
public:
    using Error::Error;
};

class NonPositiveSize : public Error {
public:
    using Error::Error;
};

class NoDivisions : public Error {
public:
    using Error::Error;
};

// Per-grid-point estimation outcome. Quotient estimators fail pointwise
// (an empty denominator at one x does not invalidate the rest of the curve),
// so these travel as statuses rather than exceptions.
enum class EstimateStatus {
    ok,
    denominator_zero,
    degenerate_criterion,
    outside_projection_interval,
    negative_numerator,
};

const char* to_string(EstimateStatus s);

} // namespace pdmp

#endif
