#ifndef PDMP_SIMULATE_HPP
#define PDMP_SIMULATE_HPP

#include "pdmp/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pdmp {

// Embedded chain of a simulated trajectory. Entry k describes jump k+1 of
// the process: s[k] = S_{k+1}, z_minus[k] = Z_{k+1}^-, z[k] = Z_{k+1},
// t[k] = T_{k+1}. The initial state Z_0 is kept separately in z0.
struct Trajectory {
    double z0 = 0.0;
    std::vector<double> z;
    std::vector<double> z_minus;
    std::vector<double> s;
    std::vector<double> t;
    std::string model_label;
    std::uint64_t seed = 0;

    std::size_t jumps() const { return z.size(); }
    // Z_i for i = 0..n-1, i.e. the state each inter-jump segment starts from.
    double head(std::size_t i) const { return i == 0 ? z0 : z[i - 1]; }
};

// Continuous-time samples X_{i dt} reconstructed from a trajectory.
// division_flags[i] marks the grid cell (i dt, (i+1) dt] containing a jump,
// so a flagged row is the last sample before that jump.
struct GridSamples {
    double dt = 0.0;
    std::vector<double> values;
    std::vector<bool> division_flags;
};

// Inter-jump time from state z at survival level u in (0,1): the t solving
// G(t|z) = u. Closed form when the model provides one, otherwise cumulative
// hazard inversion by bracket doubling and bisection (to 1e-10).
double sample_interjump(const ModelSpec& model, double z, double u);

// First n jumps of the chain started at z0. Output is a pure function of
// (model, z0, n, seed, stream).
Trajectory simulate_chain(const ModelSpec& model, double z0, std::size_t n,
                          std::uint64_t seed, std::uint64_t stream = 0);

GridSamples sample_grid(const ModelSpec& model, const Trajectory& traj, double dt);

// CSV with header k,z,z_minus,s,t; one row per jump.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

// CSV with header time,size,division (the schema the lineage parser reads).
// For models on log-size, pass state_is_log to emit exp(state) as the size.
void write_grid_csv(const GridSamples& grid, const std::filesystem::path& path,
                    bool state_is_log = false);

} // namespace pdmp

#endif
