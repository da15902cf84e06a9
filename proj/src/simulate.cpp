#include "pdmp/simulate.hpp"

#include "pdmp/csv.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/numerics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pdmp {

namespace {

constexpr double kMaxBracket = 1e6;

double invert_hazard(const ModelSpec& model, double z, double u) {
    const auto& rate = model.rate->eval;
    const auto& flow = model.flow.eval;
    const double target = -std::log(u);
    auto hazard = [&](double t) {
        return num::integrate([&](double s) { return rate(flow(s, z)); }, 0.0, t, 1e-10);
    };
    double hi = 1.0;
    while (hazard(hi) < target) {
        hi *= 2.0;
        if (hi > kMaxBracket) {
            std::ostringstream msg;
            msg << "cumulative hazard from z=" << z << " stays below " << target
                << " out to t=" << kMaxBracket << "; the process never jumps";
            throw HazardExhausted(msg.str());
        }
    }
    return num::bisect_nondecreasing(hazard, 0.0, hi, target, 1e-10);
}

} // namespace

double sample_interjump(const ModelSpec& model, double z, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw ParameterOutOfRange("sample_interjump: u must lie in (0,1)");
    }
    if (model.inverse_survival) {
        return model.inverse_survival(z, u);
    }
    if (!model.rate) {
        throw ParameterOutOfRange("sample_interjump: model has no jump rate attached");
    }
    return invert_hazard(model, z, u);
}

Trajectory simulate_chain(const ModelSpec& model, double z0, std::size_t n,
                          std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) throw ParameterOutOfRange("simulate_chain: n must be at least 1");
    rng::Stream rng(seed, stream);
    Trajectory traj;
    traj.z0 = z0;
    traj.model_label = model.label;
    traj.seed = seed;
    traj.z.reserve(n);
    traj.z_minus.reserve(n);
    traj.s.reserve(n);
    traj.t.reserve(n);
    double state = z0;
    double clock = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = rng.uniform_open01();
        double s;
        try {
            s = sample_interjump(model, state, u);
        } catch (const HazardExhausted& e) {
            throw HazardExhausted(std::string(e.what()) + " (at jump " +
                                      std::to_string(k) + ")",
                                  k);
        }
        const double pre = model.flow.eval(s, state);
        double post;
        if (const auto* det = std::get_if<DeterministicTransition>(&model.transition)) {
            post = det->h(pre);
        } else {
            post = std::get<RandomRatioTransition>(model.transition).sample(pre, rng);
        }
        clock += s;
        traj.s.push_back(s);
        traj.z_minus.push_back(pre);
        traj.z.push_back(post);
        traj.t.push_back(clock);
        state = post;
    }
    return traj;
}

GridSamples sample_grid(const ModelSpec& model, const Trajectory& traj, double dt) {
    if (!(dt > 0.0)) throw ParameterOutOfRange("sample_grid: dt must be positive");
    if (traj.jumps() == 0) throw ParameterOutOfRange("sample_grid: empty trajectory");
    GridSamples grid;
    grid.dt = dt;
    const double t_end = traj.t.back();
    const std::size_t len = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
    grid.values.reserve(len);
    grid.division_flags.assign(len, false);
    std::size_t next_jump = 0; // first jump with t > current grid time
    for (std::size_t i = 0; i < len; ++i) {
        const double g = dt * static_cast<double>(i);
        while (next_jump < traj.jumps() && traj.t[next_jump] <= g) ++next_jump;
        const double base = next_jump == 0 ? traj.z0 : traj.z[next_jump - 1];
        const double since = next_jump == 0 ? g : g - traj.t[next_jump - 1];
        grid.values.push_back(model.flow.eval(since, base));
    }
    for (std::size_t k = 0; k < traj.jumps(); ++k) {
        if (traj.t[k] <= 0.0 || traj.t[k] > t_end) continue;
        const std::size_t cell =
            static_cast<std::size_t>(std::ceil(traj.t[k] / dt)) - 1;
        if (cell < len) grid.division_flags[cell] = true;
    }
    return grid;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "k,z,z_minus,s,t\n";
    for (std::size_t k = 0; k < traj.jumps(); ++k) {
        out << k << ',' << csv::fmt17(traj.z[k]) << ',' << csv::fmt17(traj.z_minus[k])
            << ',' << csv::fmt17(traj.s[k]) << ',' << csv::fmt17(traj.t[k]) << '\n';
    }
}

void write_grid_csv(const GridSamples& grid, const std::filesystem::path& path,
                    bool state_is_log) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "time,size,division\n";
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const double size = state_is_log ? std::exp(grid.values[i]) : grid.values[i];
        out << csv::fmt17(grid.dt * static_cast<double>(i)) << ',' << csv::fmt17(size)
            << ',' << (grid.division_flags[i] ? 1 : 0) << '\n';
    }
}

} // namespace pdmp
