#ifndef PDMP_ESTIMATORS_HPP
#define PDMP_ESTIMATORS_HPP

#include "pdmp/errors.hpp"
#include "pdmp/model.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/theory.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

namespace pdmp {

// Kernel density, nonnegative, integrating to 1, supported on
// [-support_radius, support_radius]. tau2 = int K^2.
struct Kernel {
    double (*eval)(double u);
    double support_radius;
    double tau2;
};

// K(u) = 0.75 (1 - u^2) on [-1, 1]; tau2 = 3/5.
Kernel epanechnikov();

inline double kernel_h(const Kernel& k, double v, double h) {
    return k.eval(v / h) / h;
}

struct PointEstimate {
    double value = 0.0;
    EstimateStatus status = EstimateStatus::ok;
    bool ok() const { return status == EstimateStatus::ok; }
};

// The chain segments the estimators consume: aligned quadruples
// (Z_i, S_{i+1}, Z_{i+1}^-, Z_{i+1}) for i = 0..n-1, stored sorted by Z_i
// for kernel window queries (plus a separately sorted copy of the Z^-).
// Estimates are invariant under the input order by construction.
class ChainData {
public:
    ChainData(std::vector<double> z_head, std::vector<double> s_next,
              std::vector<double> z_minus_next, std::vector<double> z_post_next);

    static ChainData from(const Trajectory& traj);

    std::size_t size() const { return zh_.size(); }
    const std::vector<double>& z_head_sorted() const { return zh_; }
    const std::vector<double>& s_by_head() const { return s_; }
    const std::vector<double>& z_minus_by_head() const { return zm_; }
    const std::vector<double>& z_post_by_head() const { return zp_; }
    const std::vector<double>& z_minus_sorted() const { return zm_sorted_; }

private:
    std::vector<double> zh_, s_, zm_, zp_;
    std::vector<double> zm_sorted_;
};

// Empirical mean (1/n) sum_i K_h(v_i - c) over a sorted sample.
double kernel_mean_sorted(const std::vector<double>& sorted, double c, double h,
                          const Kernel& kernel);

// #{i : Z_i <= x, Z_{i+1} >= hx} (the indicator pair of the fragmentation
// estimator; hx = h(x)).
std::size_t denominator_count_k(const ChainData& chain, double x, double hx);

// #{i : Z_i <= x < Z_{i+1}^-}.
std::size_t denominator_count_ks(const ChainData& chain, double x);

// Fragmentation-based jump rate estimator:
//   h'(x) Delta(x) * [n^-1 sum K_h(Z_i - h(x))] / [n^-1 sum 1{Z_i<=x} 1{Z_{i+1}>=h(x)}].
// Requires a deterministic transition.
PointEstimate lambda_k(const ChainData& chain, double x, double h,
                       const ModelSpec& model, const Kernel& kernel);

// Pre-jump-density-based estimator:
//   Delta(x) * [n^-1 sum K_h(Z_i^- - x)] / [n^-1 sum 1{Z_i<=x<Z_{i+1}^-}].
PointEstimate lambda_ks(const ChainData& chain, double x, double h,
                        const ModelSpec& model, const Kernel& kernel);

// Estimator of lambda(Phi(t|xi)):
//   [sum K_hs(Z_i - xi) K_ht(S_{i+1} - t)] / [sum K_hs(Z_i - xi) 1{S_{i+1}>t}].
PointEstimate lambda_circ_phi(const ChainData& chain, double xi, double t,
                              double hs, double ht, const Kernel& kernel);

// Ground-truth handles for the oracle argument selection.
struct OracleHandles {
    std::function<double(double xi)> mu;
    std::function<double(double xi, double t)> survival;
};

// Oracle argmax of mu(xi) G(tau_x(xi)|xi) over the C_x grid.
double oracle_argmax(double x, const FlowSpec& flow, const OracleHandles& oracle,
                     const theory::CxGrid& cx = {});

// Empirical argmax criterion sum_i K_hs(Z_i - xi) 1{S_{i+1} > tau_x(xi)}
// evaluated on a xi grid (tau_x from the flow).
std::vector<double> amg_criterion(const ChainData& chain, double x, double hs,
                                  const Kernel& kernel, const FlowSpec& flow,
                                  const std::vector<double>& xi_grid);

double amg_argmax(const ChainData& chain, double x, double hs, const Kernel& kernel,
                  const FlowSpec& flow, const theory::CxGrid& cx = {});

// Jump rate at x via the conditional estimator evaluated at the oracle-selected
// argument (xi*, tau_x(xi*)).
PointEstimate lambda_amgo(const ChainData& chain, double x, double hs, double ht,
                          const Kernel& kernel, const FlowSpec& flow,
                          const OracleHandles& oracle, const theory::CxGrid& cx = {});

// Same with the argument selected by maximizing the empirical criterion,
// using the estimator's own spatial bandwidth.
PointEstimate lambda_amg(const ChainData& chain, double x, double hs, double ht,
                         const Kernel& kernel, const FlowSpec& flow,
                         const theory::CxGrid& cx = {});

// Trajectory-level conveniences.
PointEstimate lambda_k(const Trajectory& traj, double x, double h,
                       const ModelSpec& model, const Kernel& kernel);
PointEstimate lambda_ks(const Trajectory& traj, double x, double h,
                        const ModelSpec& model, const Kernel& kernel);

// Batch evaluation of the conditional estimator at fixed (xi, t, hs) across
// many time bandwidths: the spatial weights and the denominator do not
// depend on ht, so they are computed once. Entries are sorted by the
// recentered time d_i = s_i - t with prefix sums of w and w d^2, which turn
// each Epanechnikov time-kernel sum into two window lookups.
struct CircPhiProfile {
    double den = 0.0; // (1/n) sum w_i 1{s_i > t}
    double t = 0.0;
    std::size_t n = 0;
    std::vector<double> d;     // s_i - t, sorted, |d| <= ht_max
    std::vector<double> w;     // aligned spatial weights
    std::vector<double> pw;    // prefix sums of w (size d.size()+1)
    std::vector<double> pwd2;  // prefix sums of w d^2
};

CircPhiProfile circ_phi_profile(const ChainData& chain, double xi, double t,
                                double hs, const Kernel& kernel, double ht_max);

PointEstimate circ_phi_at(const CircPhiProfile& profile, double ht,
                          const Kernel& kernel);

enum class EstimatorKind { k, ks, amgo, amg, adaptive_k, adaptive_ks };

const char* to_string(EstimatorKind kind);

struct Bandwidths {
    double h = 0.0;  // spatial bandwidth of the one-bandwidth estimators
    double hs = 0.0; // spatial / time pair of the conditional estimators
    double ht = 0.0;
};

struct EstimateCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<EstimateStatus> status;
    EstimatorKind kind = EstimatorKind::ks;
    Bandwidths bandwidths;
    std::size_t n = 0;

    std::vector<std::size_t> failures() const;
};

// Evaluate one of the four kernel estimators over a state grid.
EstimateCurve estimate_curve(EstimatorKind kind, const ChainData& chain,
                             const std::vector<double>& grid, Bandwidths bw,
                             const ModelSpec& model, const Kernel& kernel,
                             const OracleHandles* oracle = nullptr,
                             const theory::CxGrid& cx = {});

// CSV with header x,estimate,failed.
void write_curve_csv(const EstimateCurve& curve, const std::filesystem::path& path);

} // namespace pdmp

#endif
