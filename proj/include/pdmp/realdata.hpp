#ifndef PDMP_REALDATA_HPP
#define PDMP_REALDATA_HPP

#include "pdmp/adaptive.hpp"
#include "pdmp/estimators.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pdmp::realdata {

struct LineageRow {
    double time = 0.0;   // minutes
    double size = 0.0;   // micrometers
    bool division = false;
};

// One lineage file: per-minute sizes with division flags. The flagged row is
// the last pre-division measurement; the next row is post-division.
struct LineageRecord {
    std::string lineage_id;
    std::vector<LineageRow> rows;
    std::size_t divisions() const;
};

// Parses a CSV with header time,size,division. Times must be strictly
// increasing, sizes positive, division flags 0/1.
LineageRecord parse_lineage(const std::filesystem::path& path);

// All *.csv files in a directory, sorted by filename.
std::vector<LineageRecord> parse_lineage_dir(const std::filesystem::path& dir);

struct SlopeFit {
    std::vector<double> slopes; // one OLS slope of log-size per growth segment
    double theta_mean = 0.0;
    std::size_t skipped_segments = 0; // fewer than two points
};

// Per-segment linear fits of log size against time, pooled across lineages.
SlopeFit fit_slopes(const std::vector<LineageRecord>& records);

// Embedded chain read off the minute grid. z_minus is the log size at the
// flagged minute, z the log size at the next minute; s the minutes between
// consecutive flags of one lineage.
struct EmbeddedData {
    std::vector<double> z;
    std::vector<double> z_minus;
    std::vector<double> s;
    std::vector<double> division_ratios;
    std::vector<double> slopes;
    double theta_mean = 0.0;
    std::size_t boundary_divisions_dropped = 0; // flag on the last row of a file

    // Chain pairs (Z_i, S_{i+1}, Z_{i+1}^-, Z_{i+1}) assembled within each
    // lineage; estimation pools them.
    std::vector<double> pair_z, pair_s, pair_z_minus, pair_z_post;

    ChainData chain() const;
    double mean_interjump() const;
    double ratio_mean() const;
    double ratio_sd() const;
};

EmbeddedData extract_embedded(const std::vector<LineageRecord>& records);

enum class DivisionRateMethod { ks, adaptive_ks, amg };

struct DivisionRateParams {
    double h = 0.02;              // bandwidth for the ks estimator
    double hs = 0.03;             // spatial/time bandwidths for the amg variant
    double ht = 3.0;
    adaptive::ProjectionParams projection{};
    std::vector<double> grid;     // log-size grid; empty derives one from the data
    double grid_step = 0.01;
};

// Division rate over a log-size grid. The amg variant skips the argument
// selection and evaluates the conditional estimator at (x - theta*tau, tau)
// with tau the mean inter-division time.
EstimateCurve estimate_division_rate(const EmbeddedData& data, double theta,
                                     DivisionRateMethod method,
                                     const DivisionRateParams& params = {});

struct ValidationReport {
    double ks_distance = 0.0;
    std::size_t simulated_positions = 0;
    std::vector<double> size_grid;
    std::vector<double> simulated_density;
    std::vector<double> empirical_density;
};

// Attach the estimated rate to the fitted growth model, simulate n_jumps
// jumps from x0 on a dt grid, keep the last keep_last positions, and compare
// their size law against the raw sizes (two-sample KS plus density overlays).
ValidationReport validate_posterior(const ModelSpec& fitted_model,
                                    const EstimateCurve& rate_curve,
                                    const std::vector<double>& raw_sizes,
                                    std::uint64_t seed, std::size_t n_jumps = 1000,
                                    double x0 = 1.5, std::size_t keep_last = 10000,
                                    double dt = 1.0);

void write_validation_csv(const ValidationReport& report,
                          const std::filesystem::path& path);

// All size measurements pooled across records, in file order.
std::vector<double> pooled_sizes(const std::vector<LineageRecord>& records);

} // namespace pdmp::realdata

#endif
