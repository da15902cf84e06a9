#include "pdmp/experiments.hpp"

#include "pdmp/csv.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/theory.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace pdmp::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDenominatorGuard = 1e-12;

double median_finite(const std::vector<double>& v) {
    std::vector<double> ok;
    for (double x : v) {
        if (std::isfinite(x)) ok.push_back(x);
    }
    if (ok.empty()) throw EmptySample("median_finite: all replicates dropped");
    return num::median(std::move(ok));
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd_finite(const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double x : v) {
        if (std::isfinite(x)) {
            sum += x;
            ++count;
        }
    }
    if (count < 2) throw EmptySample("mean_sd_finite: fewer than two valid replicates");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (double x : v) {
        if (std::isfinite(x)) ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(count - 1))};
}

} // namespace

std::vector<double> GridSpec::points() const {
    return num::uniform_grid(lo, hi, step);
}

std::uint64_t task_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t n) {
    std::uint64_t s = master ^ (tag * 0x9E3779B97F4A7C15ULL) ^ (n << 20);
    rng::splitmix64(s);
    return rng::splitmix64(s);
}

void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

IseResult ise(const EstimateCurve& curve, const std::function<double(double)>& truth,
              double lo, double hi, double step) {
    IseResult result;
    double sum = 0.0;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const double x = curve.grid[i];
        if (x < lo - 1e-12 || x > hi + 1e-12) continue;
        ++result.total;
        if (curve.status[i] != EstimateStatus::ok) {
            ++result.excluded;
            continue;
        }
        const double d = curve.values[i] - truth(x);
        sum += d * d;
    }
    if (result.total == 0) throw CoverageGap("ise: curve does not cover the interval");
    if (5 * result.excluded > result.total) {
        throw CoverageGap("ise: more than 20% of grid points failed");
    }
    result.value = step * sum;
    return result;
}

namespace {

// ---- fast per-replicate machinery for the bandwidth search ----------------

// Criterion sweep for the estimated argmax on a uniform xi grid, specialized
// to the Epanechnikov kernel and a linear flow (t = (x - xi)/theta). Each
// sample contributes a quadratic in xi on one contiguous index range, so the
// whole grid costs O(n + grid) via difference arrays. Cells covered by no
// sample are detected exactly with an integer cover count.
struct AmgSweep {
    const theory::CxGrid cx{};
    std::vector<double> pts;
    std::vector<double> diff_a, diff_b;
    std::vector<int> diff_cover;

    explicit AmgSweep(double x) : pts(cx.points(x)) {
        diff_a.assign(pts.size() + 1, 0.0);
        diff_b.assign(pts.size() + 1, 0.0);
        diff_cover.assign(pts.size() + 1, 0);
    }

    // smallest index j with pts[j] > v (pts uniform: eps + j*step)
    long first_above(double v) const {
        long j = static_cast<long>(std::floor((v - cx.eps) / cx.step)) + 1;
        j = std::max<long>(j, 0);
        while (j < static_cast<long>(pts.size()) && pts[static_cast<std::size_t>(j)] <= v) ++j;
        while (j > 0 && pts[static_cast<std::size_t>(j - 1)] > v) --j;
        return j;
    }

    // largest index j with pts[j] < v, or -1
    long last_below(double v) const {
        long j = static_cast<long>(std::ceil((v - cx.eps) / cx.step)) - 1;
        j = std::min<long>(j, static_cast<long>(pts.size()) - 1);
        while (j >= 0 && pts[static_cast<std::size_t>(j)] >= v) --j;
        while (j + 1 < static_cast<long>(pts.size()) && pts[static_cast<std::size_t>(j + 1)] < v) ++j;
        return j;
    }

    // active xi range of one sample: xi in (max(zh - hs, x - s*theta), zh + hs)
    void add_sample(double zh, double s_scaled, double x, double hs) {
        const long lo = first_above(std::max(zh - hs, x - s_scaled));
        const long hi = last_below(zh + hs);
        if (lo > hi) return;
        const double inv = 1.0 / hs;
        const double a = 0.75 * inv * (1.0 - zh * zh * inv * inv);
        const double b = 1.5 * zh * inv * inv * inv;
        diff_a[static_cast<std::size_t>(lo)] += a;
        diff_a[static_cast<std::size_t>(hi) + 1] -= a;
        diff_b[static_cast<std::size_t>(lo)] += b;
        diff_b[static_cast<std::size_t>(hi) + 1] -= b;
        diff_cover[static_cast<std::size_t>(lo)] += 1;
        diff_cover[static_cast<std::size_t>(hi) + 1] -= 1;
    }

    // argmax of the accumulated criterion over cells at or above xi_min;
    // NaN if it vanishes everywhere
    double argmax(double hs, double xi_min) const {
        double acc_a = 0.0, acc_b = 0.0;
        int cover = 0;
        const double c = -0.75 / (hs * hs * hs);
        double best = 0.0, best_xi = kNaN;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            acc_a += diff_a[j];
            acc_b += diff_b[j];
            cover += diff_cover[j];
            if (cover <= 0 || pts[j] + 1e-12 < xi_min) continue;
            const double xi = pts[j];
            const double val = acc_a + acc_b * xi + c * static_cast<double>(cover) * xi * xi;
            if (val > best) {
                best = val;
                best_xi = xi;
            }
        }
        if (!(best > kDenominatorGuard)) return kNaN;
        return best_xi;
    }
};

double amg_argmax_linear_flow(const ChainData& chain, double x, double hs, double theta) {
    AmgSweep sweep(x);
    if (sweep.pts.empty()) return kNaN;
    const auto& zh = chain.z_head_sorted();
    const auto& s = chain.s_by_head();
    for (std::size_t i = 0; i < zh.size(); ++i) {
        sweep.add_sample(zh[i], s[i] * theta, x, hs);
    }
    return sweep.argmax(hs, x - sweep.cx.t_max * theta);
}

struct ReplicateOptima {
    double h_k = kNaN, h_ks = kNaN;
    double hs_amgo = kNaN, ht_amgo = kNaN;
    double hs_amg = kNaN, ht_amg = kNaN;
};

// Conditional-estimator numerators for every ht of a uniform grid at once:
// samples are binned by |s - t| on the grid steps, so the Epanechnikov sums
// for ht = grid[j] follow from cumulative bin totals (K vanishes at |d|=ht,
// making the bin-boundary assignment immaterial).
struct BinnedCircPhi {
    double den = 0.0;
    std::vector<double> w0, wd2; // cumulative over bins 0..j

    BinnedCircPhi(const ChainData& chain, double xi, double t, double hs,
                  double ht_lo, double ht_step, std::size_t nht) {
        const auto& zh = chain.z_head_sorted();
        const auto& s = chain.s_by_head();
        const double r = hs; // Epanechnikov support radius is 1
        const auto lo_it = std::lower_bound(zh.begin(), zh.end(), xi - r);
        const auto hi_it = std::upper_bound(lo_it, zh.end(), xi + r);
        w0.assign(nht, 0.0);
        wd2.assign(nht, 0.0);
        const double inv_hs = 1.0 / hs;
        const double reach = ht_lo + ht_step * static_cast<double>(nht - 1);
        for (auto it = lo_it; it != hi_it; ++it) {
            const std::size_t i = static_cast<std::size_t>(it - zh.begin());
            const double u = (zh[i] - xi) * inv_hs;
            const double ws = 0.75 * (1.0 - u * u) * inv_hs;
            if (ws <= 0.0) continue;
            const double d = s[i] - t;
            if (d > 0.0) den += ws;
            const double ad = std::abs(d);
            if (ad >= reach) continue;
            // smallest j with ht_j >= ad (K vanishes at |d| = ht exactly)
            std::size_t bin = 0;
            if (ad > ht_lo) {
                bin = static_cast<std::size_t>(std::ceil((ad - ht_lo) / ht_step));
            }
            if (bin >= nht) bin = nht - 1;
            w0[bin] += ws;
            wd2[bin] += ws * d * d;
        }
        for (std::size_t j = 1; j < nht; ++j) {
            w0[j] += w0[j - 1];
            wd2[j] += wd2[j - 1];
        }
    }

    // numerator sum (not divided by n) at ht = ht_lo + j*ht_step
    double numerator(std::size_t j, double ht) const {
        return 0.75 / ht * (w0[j] - wd2[j] / (ht * ht));
    }
};

// ISE-optimal bandwidths for one simulated chain, with the denominators and
// argument selections shared across candidate bandwidths where the formulas
// allow it.
ReplicateOptima search_replicate(const ChainData& chain, const ModelSpec& model,
                                 const Kernel& kernel, const std::vector<double>& xs,
                                 double step, const std::vector<double>& h_grid,
                                 const std::vector<double>& hs_grid,
                                 const std::vector<double>& ht_grid,
                                 const std::vector<double>& oracle_xi) {
    ReplicateOptima out;
    const std::size_t nx = xs.size();
    const double n = static_cast<double>(chain.size());
    const auto& frag = model.fragmentation();
    const double theta = model.flow.derivative_at_zero(0.0);

    // Denominators depend on x only.
    std::vector<double> den_k(nx), den_ks(nx), hx(nx), pre_k(nx), pre_ks(nx);
    std::size_t failed_k = 0, failed_ks = 0;
    for (std::size_t i = 0; i < nx; ++i) {
        hx[i] = frag.h(xs[i]);
        den_k[i] = static_cast<double>(denominator_count_k(chain, xs[i], hx[i])) / n;
        den_ks[i] = static_cast<double>(denominator_count_ks(chain, xs[i])) / n;
        pre_k[i] = frag.h_prime(xs[i]) * model.flow.derivative_at_zero(xs[i]);
        pre_ks[i] = model.flow.derivative_at_zero(xs[i]);
        if (den_k[i] < kDenominatorGuard) ++failed_k;
        if (den_ks[i] < kDenominatorGuard) ++failed_ks;
    }

    if (5 * failed_k <= nx) {
        double best = std::numeric_limits<double>::infinity();
        for (double h : h_grid) {
            double sum = 0.0;
            for (std::size_t i = 0; i < nx; ++i) {
                if (den_k[i] < kDenominatorGuard) continue;
                const double num = kernel_mean_sorted(chain.z_head_sorted(), hx[i], h, kernel);
                const double d = pre_k[i] * num / den_k[i] - xs[i];
                sum += d * d;
            }
            if (step * sum < best) {
                best = step * sum;
                out.h_k = h;
            }
        }
    }
    if (5 * failed_ks <= nx) {
        double best = std::numeric_limits<double>::infinity();
        for (double h : h_grid) {
            double sum = 0.0;
            for (std::size_t i = 0; i < nx; ++i) {
                if (den_ks[i] < kDenominatorGuard) continue;
                const double num = kernel_mean_sorted(chain.z_minus_sorted(), xs[i], h, kernel);
                const double d = pre_ks[i] * num / den_ks[i] - xs[i];
                sum += d * d;
            }
            if (step * sum < best) {
                best = step * sum;
                out.h_ks = h;
            }
        }
    }

    // Conditional estimators: for each hs, fix the arguments (xi*, tau), bin
    // the ht-independent profiles once, then sweep the whole ht grid.
    const std::size_t nht = ht_grid.size();
    const double ht_lo = ht_grid.front();
    const double ht_step = nht > 1 ? ht_grid[1] - ht_grid[0] : 1.0;
    double best_amgo = std::numeric_limits<double>::infinity();
    double best_amg = std::numeric_limits<double>::infinity();
    std::vector<double> ise_o(nht), ise_a(nht);
    for (double hs : hs_grid) {
        std::fill(ise_o.begin(), ise_o.end(), 0.0);
        std::fill(ise_a.begin(), ise_a.end(), 0.0);
        std::size_t failed_o = 0, failed_a = 0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = xs[i];
            { // oracle argument
                const double xi = oracle_xi[i];
                const BinnedCircPhi prof(chain, xi, model.flow.inverse_time(xi, x), hs,
                                         ht_lo, ht_step, nht);
                if (prof.den / n < kDenominatorGuard) {
                    ++failed_o;
                } else {
                    for (std::size_t j = 0; j < nht; ++j) {
                        const double d = prof.numerator(j, ht_grid[j]) / prof.den - x;
                        ise_o[j] += d * d;
                    }
                }
            }
            { // estimated argument
                const double xi = amg_argmax_linear_flow(chain, x, hs, theta);
                if (!std::isfinite(xi)) {
                    ++failed_a;
                    continue;
                }
                const BinnedCircPhi prof(chain, xi, model.flow.inverse_time(xi, x), hs,
                                         ht_lo, ht_step, nht);
                if (prof.den / n < kDenominatorGuard) {
                    ++failed_a;
                } else {
                    for (std::size_t j = 0; j < nht; ++j) {
                        const double d = prof.numerator(j, ht_grid[j]) / prof.den - x;
                        ise_a[j] += d * d;
                    }
                }
            }
        }
        if (5 * failed_o <= nx) {
            for (std::size_t j = 0; j < nht; ++j) {
                if (step * ise_o[j] < best_amgo) {
                    best_amgo = step * ise_o[j];
                    out.hs_amgo = hs;
                    out.ht_amgo = ht_grid[j];
                }
            }
        }
        if (5 * failed_a <= nx) {
            for (std::size_t j = 0; j < nht; ++j) {
                if (step * ise_a[j] < best_amg) {
                    best_amg = step * ise_a[j];
                    out.hs_amg = hs;
                    out.ht_amg = ht_grid[j];
                }
            }
        }
    }
    return out;
}

OracleHandles tcp_oracle_handles(double kappa) {
    return OracleHandles{
        [kappa](double xi) { return theory::tcp_mu(xi, kappa); },
        [](double xi, double t) { return std::exp(-(xi * t + 0.5 * t * t)); },
    };
}

std::vector<double> precompute_oracle_xi(const std::vector<double>& xs, double kappa) {
    std::vector<double> xi(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xi[i] = theory::tcp_oracle_argmax(xs[i], kappa);
    }
    return xi;
}

} // namespace

BandwidthSearchResult bandwidth_search(const ExperimentConfig& config, std::size_t n) {
    const ModelSpec model = tcp_model(config.kappa);
    const Kernel kernel = epanechnikov();
    const auto xs = config.ise_grid.points();
    const auto h_grid = config.bandwidth_grids.h.points();
    const auto hs_grid = config.bandwidth_grids.hs.points();
    const auto ht_grid = config.bandwidth_grids.ht.points();
    const auto oracle_xi = precompute_oracle_xi(xs, config.kappa);
    const std::uint64_t seed = task_seed(config.seed, 1, n);

    const std::size_t R = config.replicates;
    BandwidthSearchResult result;
    result.n = n;
    result.replicates = R;
    result.h_k.assign(R, kNaN);
    result.h_ks.assign(R, kNaN);
    result.hs_amgo.assign(R, kNaN);
    result.ht_amgo.assign(R, kNaN);
    result.hs_amg.assign(R, kNaN);
    result.ht_amg.assign(R, kNaN);

    parallel_for(config.jobs, R, [&](std::size_t r) {
        const Trajectory traj = simulate_chain(model, config.z0, n, seed, r);
        const ChainData chain = ChainData::from(traj);
        const ReplicateOptima opt = search_replicate(chain, model, kernel, xs,
                                                     config.ise_grid.step, h_grid,
                                                     hs_grid, ht_grid, oracle_xi);
        result.h_k[r] = opt.h_k;
        result.h_ks[r] = opt.h_ks;
        result.hs_amgo[r] = opt.hs_amgo;
        result.ht_amgo[r] = opt.ht_amgo;
        result.hs_amg[r] = opt.hs_amg;
        result.ht_amg[r] = opt.ht_amg;
    });

    auto count_nan = [](const std::vector<double>& v) {
        std::size_t c = 0;
        for (double x : v) {
            if (!std::isfinite(x)) ++c;
        }
        return c;
    };
    result.dropped_k = count_nan(result.h_k);
    result.dropped_ks = count_nan(result.h_ks);
    result.dropped_amgo = count_nan(result.hs_amgo);
    result.dropped_amg = count_nan(result.hs_amg);
    result.median_h_k = median_finite(result.h_k);
    result.median_h_ks = median_finite(result.h_ks);
    result.median_hs_amgo = median_finite(result.hs_amgo);
    result.median_ht_amgo = median_finite(result.ht_amgo);
    result.median_hs_amg = median_finite(result.hs_amg);
    result.median_ht_amg = median_finite(result.ht_amg);
    return result;
}

SelectedBandwidths selected_bandwidths(const BandwidthSearchResult& search) {
    SelectedBandwidths bw;
    bw.k.h = search.median_h_k;
    bw.ks.h = search.median_h_ks;
    bw.amgo.hs = search.median_hs_amgo;
    bw.amgo.ht = search.median_ht_amgo;
    bw.amg.hs = search.median_hs_amg;
    bw.amg.ht = search.median_ht_amg;
    return bw;
}

CltResult clt_experiment(const ExperimentConfig& config, std::size_t n,
                         const SelectedBandwidths& bw) {
    const ModelSpec model = tcp_model(config.kappa);
    const Kernel kernel = epanechnikov();
    const double x = config.clt_x;
    const OracleHandles oracle = tcp_oracle_handles(config.kappa);
    const std::uint64_t seed = task_seed(config.seed, 2, n);
    const std::size_t R = config.replicates;

    CltResult result;
    result.n = n;
    result.x = x;
    const std::array<EstimatorKind, 4> kinds{EstimatorKind::k, EstimatorKind::ks,
                                             EstimatorKind::amgo, EstimatorKind::amg};
    std::array<std::vector<double>, 4> estimates;
    for (auto& v : estimates) v.assign(R, kNaN);

    parallel_for(config.jobs, R, [&](std::size_t r) {
        const Trajectory traj = simulate_chain(model, config.z0, n, seed, r);
        const ChainData chain = ChainData::from(traj);
        const PointEstimate pk = lambda_k(chain, x, bw.k.h, model, kernel);
        const PointEstimate pks = lambda_ks(chain, x, bw.ks.h, model, kernel);
        const PointEstimate po =
            lambda_amgo(chain, x, bw.amgo.hs, bw.amgo.ht, kernel, model.flow, oracle);
        const PointEstimate pa =
            lambda_amg(chain, x, bw.amg.hs, bw.amg.ht, kernel, model.flow);
        if (pk.ok()) estimates[0][r] = pk.value;
        if (pks.ok()) estimates[1][r] = pks.value;
        if (po.ok()) estimates[2][r] = po.value;
        if (pa.ok()) estimates[3][r] = pa.value;
    });

    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        CltKindResult kr;
        kr.kind = kinds[i];
        kr.estimates = std::move(estimates[i]);
        for (double v : kr.estimates) {
            if (!std::isfinite(v)) ++kr.failed;
        }
        const MeanSd ms = mean_sd_finite(kr.estimates);
        kr.emp_mean = ms.mean;
        kr.emp_sd = ms.sd;
        kr.theory_mean = x;
        switch (kr.kind) {
            case EstimatorKind::k:
                kr.theory_sd = std::sqrt(theory::sigma_k2(x, config.kappa, kernel.tau2) /
                                         (dn * bw.k.h));
                break;
            case EstimatorKind::ks:
                kr.theory_sd = std::sqrt(theory::sigma_ks2(x, config.kappa, kernel.tau2) /
                                         (dn * bw.ks.h));
                break;
            case EstimatorKind::amgo:
                kr.theory_sd = std::sqrt(theory::sigma_amg2(x, config.kappa, kernel.tau2) /
                                         (dn * bw.amgo.hs * bw.amgo.ht));
                break;
            default:
                kr.theory_sd = std::sqrt(theory::sigma_amg2(x, config.kappa, kernel.tau2) /
                                         (dn * bw.amg.hs * bw.amg.ht));
                break;
        }
        result.kinds.push_back(std::move(kr));
    }
    return result;
}

double ErrorCell::median() const {
    return num::median(abs_errors);
}

const std::vector<ErrorCell>& PointwiseErrors::for_kind(EstimatorKind kind) const {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] == kind) return cells[i];
    }
    throw ParameterOutOfRange("PointwiseErrors: kind not present");
}

PointwiseErrors pointwise_error_experiment(const ExperimentConfig& config,
                                           std::size_t n, const SelectedBandwidths& bw) {
    const ModelSpec model = tcp_model(config.kappa);
    const Kernel kernel = epanechnikov();
    const auto grid = config.error_grid.points();
    const OracleHandles oracle = tcp_oracle_handles(config.kappa);
    const std::uint64_t seed = task_seed(config.seed, 3, n);
    const std::size_t R = config.replicates;
    const std::size_t nx = grid.size();

    PointwiseErrors result;
    result.n = n;
    result.grid = grid;
    result.kinds = {EstimatorKind::k, EstimatorKind::ks, EstimatorKind::amgo,
                    EstimatorKind::amg};
    // per replicate grid of values, folded into cells afterwards so the
    // aggregation order never depends on the thread schedule
    std::vector<std::vector<std::array<double, 4>>> raw(
        R, std::vector<std::array<double, 4>>(nx, {kNaN, kNaN, kNaN, kNaN}));

    parallel_for(config.jobs, R, [&](std::size_t r) {
        const Trajectory traj = simulate_chain(model, config.z0, n, seed, r);
        const ChainData chain = ChainData::from(traj);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = grid[i];
            const PointEstimate pk = lambda_k(chain, x, bw.k.h, model, kernel);
            const PointEstimate pks = lambda_ks(chain, x, bw.ks.h, model, kernel);
            const PointEstimate po =
                lambda_amgo(chain, x, bw.amgo.hs, bw.amgo.ht, kernel, model.flow, oracle);
            const PointEstimate pa =
                lambda_amg(chain, x, bw.amg.hs, bw.amg.ht, kernel, model.flow);
            if (pk.ok()) raw[r][i][0] = std::abs(pk.value - x);
            if (pks.ok()) raw[r][i][1] = std::abs(pks.value - x);
            if (po.ok()) raw[r][i][2] = std::abs(po.value - x);
            if (pa.ok()) raw[r][i][3] = std::abs(pa.value - x);
        }
    });

    result.cells.assign(4, std::vector<ErrorCell>(nx));
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            ErrorCell& cell = result.cells[k][i];
            cell.attempted = R;
            for (std::size_t r = 0; r < R; ++r) {
                const double e = raw[r][i][k];
                if (std::isfinite(e)) {
                    cell.abs_errors.push_back(e);
                    cell.replicates.push_back(r);
                } else {
                    ++cell.failed;
                }
            }
        }
    }
    return result;
}

PointwiseErrors adaptive_error_experiment(const ExperimentConfig& config, std::size_t n,
                                          const GridSpec& grid_spec,
                                          adaptive::ProjectionParams params) {
    const ModelSpec model = tcp_model(config.kappa);
    const auto grid = grid_spec.points();
    const std::uint64_t seed = task_seed(config.seed, 4, n);
    const std::size_t R = config.replicates;
    const std::size_t nx = grid.size();

    PointwiseErrors result;
    result.n = n;
    result.grid = grid;
    result.kinds = {EstimatorKind::adaptive_k, EstimatorKind::adaptive_ks};
    std::vector<std::vector<std::array<double, 2>>> raw(
        R, std::vector<std::array<double, 2>>(nx, {kNaN, kNaN}));

    parallel_for(config.jobs, R, [&](std::size_t r) {
        const Trajectory traj = simulate_chain(model, config.z0, n, seed, r);
        const ChainData chain = ChainData::from(traj);
        const adaptive::ProjectionFit fit_mu = adaptive::fit_mu(chain, params);
        const adaptive::ProjectionFit fit_mm = adaptive::fit_mu_minus(chain, params);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = grid[i];
            const PointEstimate pk = adaptive::adaptive_lambda_k(chain, x, model, fit_mu);
            const PointEstimate pks = adaptive::adaptive_lambda_ks(chain, x, model, fit_mm);
            if (pk.ok()) raw[r][i][0] = std::abs(pk.value - x);
            if (pks.ok()) raw[r][i][1] = std::abs(pks.value - x);
        }
    });

    result.cells.assign(2, std::vector<ErrorCell>(nx));
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            ErrorCell& cell = result.cells[k][i];
            cell.attempted = R;
            for (std::size_t r = 0; r < R; ++r) {
                const double e = raw[r][i][k];
                if (std::isfinite(e)) {
                    cell.abs_errors.push_back(e);
                    cell.replicates.push_back(r);
                } else {
                    ++cell.failed;
                }
            }
        }
    }
    return result;
}

std::vector<CrossingReport> variance_crossing_report(const std::vector<double>& kappas,
                                                     const GridSpec& x_grid, double tau2) {
    std::vector<CrossingReport> reports;
    const auto xs = x_grid.points();
    for (double kappa : kappas) {
        CrossingReport rep;
        rep.kappa = kappa;
        double prev_dk = 0.0, prev_dks = 0.0;
        bool have_prev = false;
        for (double x : xs) {
            const double sk = std::sqrt(theory::sigma_k2(x, kappa, tau2));
            const double sks = std::sqrt(theory::sigma_ks2(x, kappa, tau2));
            const double samg = std::sqrt(theory::sigma_amg2(x, kappa, tau2));
            const double dk = samg - sk;
            const double dks = samg - sks;
            if (have_prev) {
                if ((prev_dk < 0.0) != (dk < 0.0)) rep.cross_k.push_back(x);
                if ((prev_dks < 0.0) != (dks < 0.0)) rep.cross_ks.push_back(x);
            }
            prev_dk = dk;
            prev_dks = dks;
            have_prev = true;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

// ---- config (de)serialization ---------------------------------------------

namespace {

GridSpec grid_from_json(const nlohmann::json& j, GridSpec fallback) {
    GridSpec g = fallback;
    if (j.contains("lo")) g.lo = j.at("lo").get<double>();
    if (j.contains("hi")) g.hi = j.at("hi").get<double>();
    if (j.contains("step")) g.step = j.at("step").get<double>();
    return g;
}

nlohmann::json grid_to_json(const GridSpec& g) {
    return nlohmann::json{{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}};
}

} // namespace

ExperimentConfig config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound: cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    ExperimentConfig c;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.contains("kind") && m.at("kind").get<std::string>() != "tcp") {
            throw ParameterOutOfRange("bench config: only the tcp model has ground truth");
        }
        if (m.contains("kappa")) c.kappa = m.at("kappa").get<double>();
    }
    if (j.contains("z0")) c.z0 = j.at("z0").get<double>();
    if (j.contains("sample_sizes")) {
        c.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
    }
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ise_grid")) c.ise_grid = grid_from_json(j.at("ise_grid"), c.ise_grid);
    if (j.contains("error_grid")) {
        c.error_grid = grid_from_json(j.at("error_grid"), c.error_grid);
    }
    if (j.contains("clt_x")) c.clt_x = j.at("clt_x").get<double>();
    if (j.contains("bandwidth_grids")) {
        const auto& b = j.at("bandwidth_grids");
        if (b.contains("h")) {
            c.bandwidth_grids.h = grid_from_json(b.at("h"), c.bandwidth_grids.h);
        }
        if (b.contains("hs")) {
            c.bandwidth_grids.hs = grid_from_json(b.at("hs"), c.bandwidth_grids.hs);
        }
        if (b.contains("ht")) {
            c.bandwidth_grids.ht = grid_from_json(b.at("ht"), c.bandwidth_grids.ht);
        }
    }
    if (j.contains("kappa_grid")) c.kappa_grid = j.at("kappa_grid").get<std::vector<double>>();
    if (j.contains("tasks")) c.tasks = j.at("tasks").get<std::vector<std::string>>();
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
    if (c.replicates < 1) throw ParameterOutOfRange("bench config: replicates must be >= 1");
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["model"] = {{"kind", "tcp"}, {"kappa", c.kappa}};
    j["z0"] = c.z0;
    j["sample_sizes"] = c.sample_sizes;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["ise_grid"] = grid_to_json(c.ise_grid);
    j["error_grid"] = grid_to_json(c.error_grid);
    j["clt_x"] = c.clt_x;
    j["bandwidth_grids"] = {{"h", grid_to_json(c.bandwidth_grids.h)},
                            {"hs", grid_to_json(c.bandwidth_grids.hs)},
                            {"ht", grid_to_json(c.bandwidth_grids.ht)}};
    j["kappa_grid"] = c.kappa_grid;
    j["tasks"] = c.tasks;
    // jobs is a runtime knob, not part of the semantic config: reports must
    // be byte-identical whatever the worker count
    return j.dump(2);
}

// ---- bench runner ----------------------------------------------------------

namespace {

bool has_task(const ExperimentConfig& c, const std::string& name) {
    return std::find(c.tasks.begin(), c.tasks.end(), name) != c.tasks.end();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

void write_bandwidth_rows(std::ofstream& out, std::size_t n, const char* estimator,
                          const char* param, const std::vector<double>& values) {
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!std::isfinite(values[r])) continue;
        out << n << ',' << estimator << ',' << r << ',' << param << ','
            << csv::fmt17(values[r]) << '\n';
    }
}

} // namespace

void run_bench(const ExperimentConfig& config, const std::filesystem::path& outdir) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    const Kernel kernel = epanechnikov();
    nlohmann::json report;
    report["config"] = nlohmann::json::parse(config_to_json(config));

    if (has_task(config, "sigmas")) {
        const GridSpec sigma_grid{0.1, 4.0, 0.01};
        const auto reports =
            variance_crossing_report(config.kappa_grid, sigma_grid, kernel.tau2);
        auto out = open_out(outdir / "fig2_sigmas.csv");
        out << "kappa,x,sigma_k,sigma_ks,sigma_amg\n";
        for (double kappa : config.kappa_grid) {
            for (double x : sigma_grid.points()) {
                out << csv::fmt17(kappa) << ',' << csv::fmt17(x) << ','
                    << csv::fmt17(std::sqrt(theory::sigma_k2(x, kappa, kernel.tau2))) << ','
                    << csv::fmt17(std::sqrt(theory::sigma_ks2(x, kappa, kernel.tau2))) << ','
                    << csv::fmt17(std::sqrt(theory::sigma_amg2(x, kappa, kernel.tau2)))
                    << '\n';
            }
        }
        nlohmann::json jcross = nlohmann::json::array();
        for (const auto& rep : reports) {
            jcross.push_back({{"kappa", rep.kappa},
                              {"amg_vs_k", rep.cross_k},
                              {"amg_vs_ks", rep.cross_ks}});
        }
        report["crossings"] = jcross;
    }

    const bool need_search = has_task(config, "bandwidths") || has_task(config, "clt") ||
                             has_task(config, "errors") || has_task(config, "normalized");
    if (need_search) {
        std::ofstream fig3;
        if (has_task(config, "bandwidths")) {
            fig3 = open_out(outdir / "fig3_bandwidths.csv");
            fig3 << "n,estimator,replicate,param,value\n";
        }
        std::ofstream fig5;
        if (has_task(config, "clt")) {
            fig5 = open_out(outdir / "fig5_clt.csv");
            fig5 << "n,estimator,replicate,estimate,theory_mean,theory_sd\n";
        }
        std::ofstream fig7;
        if (has_task(config, "errors")) {
            fig7 = open_out(outdir / "fig7_errors.csv");
            fig7 << "n,estimator,x,replicate,abs_error\n";
        }
        std::ofstream fig6;
        if (has_task(config, "normalized")) {
            fig6 = open_out(outdir / "fig6_normalized.csv");
            fig6 << "n,x,sd_k,sd_ks,sd_amg\n";
        }
        nlohmann::json jsizes = nlohmann::json::array();
        for (std::size_t n : config.sample_sizes) {
            const BandwidthSearchResult search = bandwidth_search(config, n);
            const SelectedBandwidths bw = selected_bandwidths(search);
            nlohmann::json jn;
            jn["n"] = n;
            jn["medians"] = {{"h_k", search.median_h_k},
                             {"h_ks", search.median_h_ks},
                             {"hs_amgo", search.median_hs_amgo},
                             {"ht_amgo", search.median_ht_amgo},
                             {"hs_amg", search.median_hs_amg},
                             {"ht_amg", search.median_ht_amg}};
            jn["dropped"] = {{"k", search.dropped_k},
                             {"ks", search.dropped_ks},
                             {"amgo", search.dropped_amgo},
                             {"amg", search.dropped_amg}};
            if (has_task(config, "bandwidths")) {
                write_bandwidth_rows(fig3, n, "k", "h", search.h_k);
                write_bandwidth_rows(fig3, n, "ks", "h", search.h_ks);
                write_bandwidth_rows(fig3, n, "amgo", "h_s", search.hs_amgo);
                write_bandwidth_rows(fig3, n, "amgo", "h_t", search.ht_amgo);
                write_bandwidth_rows(fig3, n, "amg", "h_s", search.hs_amg);
                write_bandwidth_rows(fig3, n, "amg", "h_t", search.ht_amg);
            }
            if (has_task(config, "clt")) {
                const CltResult clt = clt_experiment(config, n, bw);
                nlohmann::json jclt = nlohmann::json::array();
                for (const auto& kr : clt.kinds) {
                    for (std::size_t r = 0; r < kr.estimates.size(); ++r) {
                        if (!std::isfinite(kr.estimates[r])) continue;
                        fig5 << n << ',' << to_string(kr.kind) << ',' << r << ','
                             << csv::fmt17(kr.estimates[r]) << ','
                             << csv::fmt17(kr.theory_mean) << ','
                             << csv::fmt17(kr.theory_sd) << '\n';
                    }
                    jclt.push_back({{"estimator", to_string(kr.kind)},
                                    {"emp_mean", kr.emp_mean},
                                    {"emp_sd", kr.emp_sd},
                                    {"theory_mean", kr.theory_mean},
                                    {"theory_sd", kr.theory_sd},
                                    {"failed", kr.failed}});
                }
                jn["clt"] = jclt;
            }
            if (has_task(config, "errors")) {
                const PointwiseErrors errors = pointwise_error_experiment(config, n, bw);
                nlohmann::json jerr = nlohmann::json::array();
                for (std::size_t k = 0; k < errors.kinds.size(); ++k) {
                    for (std::size_t i = 0; i < errors.grid.size(); ++i) {
                        const ErrorCell& cell = errors.cells[k][i];
                        for (std::size_t j = 0; j < cell.abs_errors.size(); ++j) {
                            fig7 << n << ',' << to_string(errors.kinds[k]) << ','
                                 << csv::fmt17(errors.grid[i]) << ',' << cell.replicates[j]
                                 << ',' << csv::fmt17(cell.abs_errors[j]) << '\n';
                        }
                        jerr.push_back({{"estimator", to_string(errors.kinds[k])},
                                        {"x", errors.grid[i]},
                                        {"median", cell.median()},
                                        {"q1", num::quantile(cell.abs_errors, 0.25)},
                                        {"q3", num::quantile(cell.abs_errors, 0.75)},
                                        {"failed", cell.failed},
                                        {"attempted", cell.attempted}});
                    }
                }
                jn["errors"] = jerr;
            }
            if (has_task(config, "normalized")) {
                const GridSpec grid{0.1, 4.0, 0.01};
                const auto curves =
                    theory::variance_curves(grid.points(), config.kappa, kernel.tau2);
                const auto sds = theory::normalized_sd_curves(
                    curves, n, bw.k.h, bw.ks.h, bw.amgo.hs, bw.amgo.ht);
                for (std::size_t i = 0; i < sds.grid.size(); ++i) {
                    fig6 << n << ',' << csv::fmt17(sds.grid[i]) << ','
                         << csv::fmt17(sds.sd_k[i]) << ',' << csv::fmt17(sds.sd_ks[i])
                         << ',' << csv::fmt17(sds.sd_amg[i]) << '\n';
                }
            }
            jsizes.push_back(std::move(jn));
        }
        report["by_sample_size"] = jsizes;
    }

    auto out = open_out(outdir / "report.json");
    out << report.dump(2) << '\n';
}

} // namespace pdmp::experiments
