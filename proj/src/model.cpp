#include "pdmp/model.hpp"

#include "pdmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace pdmp {

const DeterministicTransition& ModelSpec::fragmentation() const {
    const auto* det = std::get_if<DeterministicTransition>(&transition);
    if (det == nullptr) {
        throw ParameterOutOfRange("model '" + label + "' has no deterministic fragmentation");
    }
    return *det;
}

ModelSpec tcp_model(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        std::ostringstream msg;
        msg << "tcp_model: kappa must lie in (0,1), got " << kappa;
        throw ParameterOutOfRange(msg.str());
    }
    ModelSpec m;
    m.flow.eval = [](double t, double x) { return x + t; };
    m.flow.inverse_time = [](double xi, double x) { return tcp_inverse_time(xi, x); };
    m.flow.derivative_at_zero = [](double) { return 1.0; };
    m.rate = JumpRateSpec{[](double x) { return x; }};
    m.transition = DeterministicTransition{
        [kappa](double x) { return kappa * x; },
        [kappa](double) { return kappa; },
    };
    m.support = Interval{0.0, std::numeric_limits<double>::infinity()};
    {
        std::ostringstream lbl;
        lbl << "tcp kappa=" << kappa;
        m.label = lbl.str();
    }
    // lambda(Phi(s|xi)) = xi + s
    m.cumulative_hazard = [](double xi, double t) { return xi * t + 0.5 * t * t; };
    m.inverse_survival = [](double z, double u) {
        return -z + std::sqrt(z * z - 2.0 * std::log(u));
    };
    return m;
}

double tcp_inverse_time(double xi, double x) {
    if (x < xi) {
        std::ostringstream msg;
        msg << "tcp_inverse_time: x=" << x << " below xi=" << xi << " is never reached";
        throw Unreachable(msg.str());
    }
    return x - xi;
}

ModelSpec growth_model(double theta, double ratio_mean, double ratio_sd) {
    if (!(theta > 0.0)) {
        throw ParameterOutOfRange("growth_model: theta must be positive");
    }
    if (!(ratio_mean > 0.0 && ratio_mean < 1.0)) {
        throw ParameterOutOfRange("growth_model: ratio_mean must lie in (0,1)");
    }
    if (ratio_sd < 0.0) {
        throw ParameterOutOfRange("growth_model: ratio_sd must be nonnegative");
    }
    ModelSpec m;
    m.flow.eval = [theta](double t, double x) { return x + theta * t; };
    m.flow.inverse_time = [theta](double xi, double x) {
        if (x < xi) {
            throw Unreachable("growth flow: target below start");
        }
        return (x - xi) / theta;
    };
    m.flow.derivative_at_zero = [theta](double) { return theta; };
    m.transition = RandomRatioTransition{
        [ratio_mean, ratio_sd](double x, rng::Stream& stream) {
            const double k = stream.truncated_normal(ratio_mean, ratio_sd, 0.0, 1.0);
            return x + std::log(k);
        },
    };
    m.support = Interval{0.0, std::numeric_limits<double>::infinity()};
    {
        std::ostringstream lbl;
        lbl << "growth theta=" << theta << " ratio=" << ratio_mean << "+-" << ratio_sd;
        m.label = lbl.str();
    }
    return m;
}

ModelSpec attach_rate(ModelSpec model, JumpRateSpec rate) {
    model.rate = std::move(rate);
    // Closed forms describe the previous rate; the generic paths take over.
    model.cumulative_hazard = nullptr;
    model.inverse_survival = nullptr;
    return model;
}

JumpRateSpec rate_from_curve(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.empty()) {
        throw ParameterOutOfRange("rate_from_curve: grid and values must be nonempty and aligned");
    }
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ParameterOutOfRange("rate_from_curve: rate values must be finite and nonnegative");
        }
    }
    auto eval = [grid = std::move(grid), values = std::move(values)](double x) {
        if (x <= grid.front()) return values.front();
        if (x >= grid.back()) return values.back();
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - grid.begin());
        const double w = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return values[j - 1] * (1.0 - w) + values[j] * w;
    };
    return JumpRateSpec{std::move(eval)};
}

} // namespace pdmp
