#ifndef PDMP_MODEL_HPP
#define PDMP_MODEL_HPP

#include "pdmp/rng.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdmp {

// Deterministic flow Phi(t|x). eval must satisfy the semigroup property
// eval(t+s, x) == eval(s, eval(t, x)) and be strictly increasing in t.
struct FlowSpec {
    std::function<double(double t, double x)> eval;
    // tau_x(xi): the time to flow from xi up to x. Throws Unreachable if x < xi.
    std::function<double(double xi, double x)> inverse_time;
    // Delta(x) = d/dt Phi(t|x) at t=0.
    std::function<double(double x)> derivative_at_zero;
};

struct JumpRateSpec {
    std::function<double(double x)> eval;
};

// Deterministic fragmentation x -> h(x), h strictly increasing, h(x) <= x.
struct DeterministicTransition {
    std::function<double(double x)> h;
    std::function<double(double x)> h_prime;
};

// Random post-jump state strictly below the pre-jump state (for size-like
// states: in [0, x)).
struct RandomRatioTransition {
    std::function<double(double x, rng::Stream&)> sample;
};

using TransitionSpec = std::variant<DeterministicTransition, RandomRatioTransition>;

struct Interval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

struct ModelSpec {
    FlowSpec flow;
    std::optional<JumpRateSpec> rate; // growth models carry no rate until attach_rate
    TransitionSpec transition;
    Interval support{};
    std::string label;

    // Optional closed forms; the simulator and theory layer fall back to
    // quadrature / bisection when these are absent.
    std::function<double(double xi, double t)> cumulative_hazard; // int_0^t lambda(Phi(s|xi)) ds
    std::function<double(double z, double u)> inverse_survival;   // t solving G(t|z) = u

    bool deterministic_transition() const {
        return std::holds_alternative<DeterministicTransition>(transition);
    }
    const DeterministicTransition& fragmentation() const;
};

// TCP model: flow x+t, jump rate x, fragmentation x -> kappa*x.
ModelSpec tcp_model(double kappa);

// Time for the TCP flow to carry xi up to x (x - xi).
double tcp_inverse_time(double xi, double x);

// Cell growth model on log-size: flow x + theta*t, division ratio
// K ~ Normal(ratio_mean, ratio_sd^2) truncated to (0,1), applied as
// Z = Z^- + log K. The jump rate is left unset; use attach_rate.
ModelSpec growth_model(double theta, double ratio_mean, double ratio_sd);

// Same model with the jump rate replaced.
ModelSpec attach_rate(ModelSpec model, JumpRateSpec rate);

// Rate backed by a piecewise-linear curve, clamped to the nearest grid
// value outside [grid.front(), grid.back()].
JumpRateSpec rate_from_curve(std::vector<double> grid, std::vector<double> values);

} // namespace pdmp

#endif
