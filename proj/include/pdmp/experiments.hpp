#ifndef PDMP_EXPERIMENTS_HPP
#define PDMP_EXPERIMENTS_HPP

#include "pdmp/adaptive.hpp"
#include "pdmp/estimators.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace pdmp::experiments {

struct GridSpec {
    double lo = 0.0, hi = 0.0, step = 1.0;
    std::vector<double> points() const;
};

struct BandwidthGrids {
    GridSpec h{0.05, 1.0, 0.025};  // fragmentation / pre-jump estimators
    GridSpec hs{0.01, 0.5, 0.01};  // conditional estimators, space
    GridSpec ht{0.05, 1.5, 0.05};  // conditional estimators, time
};

struct ExperimentConfig {
    double kappa = 0.4;
    double z0 = 1.0;
    std::vector<std::size_t> sample_sizes{1000, 10000};
    std::size_t replicates = 100;
    std::uint64_t seed = 20250810;
    GridSpec ise_grid{0.5, 2.5, 0.05};
    GridSpec error_grid{0.5, 2.5, 0.2};
    double clt_x = 2.0;
    BandwidthGrids bandwidth_grids;
    std::vector<double> kappa_grid{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<std::string> tasks{"sigmas", "bandwidths", "clt", "errors", "normalized"};
    int jobs = 1;
};

ExperimentConfig config_from_json_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

// Distinct deterministic seed per (master seed, task tag, n); replicates are
// substreams of it, so tasks never share trajectories.
std::uint64_t task_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t n);

// Run fn(0..count-1) on up to `jobs` threads. Output slots are indexed by
// replicate, so results do not depend on the schedule.
void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn);

struct IseResult {
    double value = 0.0;
    std::size_t excluded = 0; // failed grid points left out of the sum
    std::size_t total = 0;
};

// Integrated square error step * sum_j (curve(x_j) - truth(x_j))^2 over the
// curve's points inside [lo, hi]. Failed points are excluded and counted;
// more than 20% failed raises CoverageGap.
IseResult ise(const EstimateCurve& curve, const std::function<double(double)>& truth,
              double lo = 0.5, double hi = 2.5, double step = 0.05);

struct BandwidthSearchResult {
    std::size_t n = 0;
    std::size_t replicates = 0;
    // Per-replicate ISE-optimal bandwidths; NaN where the replicate was
    // dropped (CoverageGap at every candidate bandwidth).
    std::vector<double> h_k, h_ks;
    std::vector<double> hs_amgo, ht_amgo, hs_amg, ht_amg;
    std::size_t dropped_k = 0, dropped_ks = 0, dropped_amgo = 0, dropped_amg = 0;
    double median_h_k = 0, median_h_ks = 0;
    double median_hs_amgo = 0, median_ht_amgo = 0;
    double median_hs_amg = 0, median_ht_amg = 0;
};

// ISE-minimizing bandwidth per replicate for all four estimators on the TCP
// model (truth lambda(x) = x), plus the per-estimator medians.
BandwidthSearchResult bandwidth_search(const ExperimentConfig& config, std::size_t n);

// Median bandwidths bundled for downstream experiments.
struct SelectedBandwidths {
    Bandwidths k, ks, amgo, amg;
};
SelectedBandwidths selected_bandwidths(const BandwidthSearchResult& search);

struct CltKindResult {
    EstimatorKind kind = EstimatorKind::ks;
    std::vector<double> estimates; // NaN where the pointwise estimate failed
    std::size_t failed = 0;
    double emp_mean = 0.0;
    double emp_sd = 0.0;
    double theory_mean = 0.0;
    double theory_sd = 0.0;
};

struct CltResult {
    std::size_t n = 0;
    double x = 2.0;
    std::vector<CltKindResult> kinds;
};

// Replicated estimation at a single state with the selected bandwidths,
// against the CLT predictions (mean lambda(x), sd from the normalized
// asymptotic variances).
CltResult clt_experiment(const ExperimentConfig& config, std::size_t n,
                         const SelectedBandwidths& bw);

struct ErrorCell {
    std::vector<double> abs_errors;      // successful replicates, in replicate order
    std::vector<std::size_t> replicates; // aligned replicate indices
    std::size_t attempted = 0;
    std::size_t failed = 0;
    double median() const;
};

struct PointwiseErrors {
    std::size_t n = 0;
    std::vector<double> grid;
    std::vector<EstimatorKind> kinds;
    std::vector<std::vector<ErrorCell>> cells; // [kind][grid point]
    const std::vector<ErrorCell>& for_kind(EstimatorKind kind) const;
};

// |lambda_hat(x) - lambda(x)| over replicates across the state grid for the
// four kernel estimators.
PointwiseErrors pointwise_error_experiment(const ExperimentConfig& config,
                                           std::size_t n, const SelectedBandwidths& bw);

// Same for the adaptive projection versions of the k/ks estimators.
PointwiseErrors adaptive_error_experiment(const ExperimentConfig& config, std::size_t n,
                                          const GridSpec& grid,
                                          adaptive::ProjectionParams params = {});

struct CrossingReport {
    double kappa = 0.0;
    std::vector<double> cross_k;  // sign changes of sigma_amg - sigma_k
    std::vector<double> cross_ks; // sign changes of sigma_amg - sigma_ks
};

std::vector<CrossingReport> variance_crossing_report(const std::vector<double>& kappas,
                                                     const GridSpec& x_grid, double tau2);

// Full benchmark: runs the configured tasks and writes report.json plus the
// per-figure CSVs into outdir. Output bytes depend only on the config.
void run_bench(const ExperimentConfig& config, const std::filesystem::path& outdir);

} // namespace pdmp::experiments

#endif
