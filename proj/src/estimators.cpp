#include "pdmp/estimators.hpp"

#include "pdmp/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace pdmp {

namespace {

constexpr double kDenominatorGuard = 1e-12;

double epan_eval(double u) {
    const double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    return 0.75 * (1.0 - u * u);
}

struct WindowIdx {
    std::size_t lo, hi; // half-open [lo, hi)
};

WindowIdx window(const std::vector<double>& sorted, double lo, double hi) {
    const auto b = std::lower_bound(sorted.begin(), sorted.end(), lo);
    const auto e = std::upper_bound(b, sorted.end(), hi);
    return {static_cast<std::size_t>(b - sorted.begin()),
            static_cast<std::size_t>(e - sorted.begin())};
}

} // namespace

Kernel epanechnikov() { return Kernel{&epan_eval, 1.0, 0.6}; }

ChainData::ChainData(std::vector<double> z_head, std::vector<double> s_next,
                     std::vector<double> z_minus_next, std::vector<double> z_post_next) {
    const std::size_t n = z_head.size();
    if (s_next.size() != n || z_minus_next.size() != n || z_post_next.size() != n) {
        throw ParameterOutOfRange("ChainData: misaligned input sequences");
    }
    if (n == 0) throw EmptySample("ChainData: empty chain");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z_head[a] != z_head[b]) return z_head[a] < z_head[b];
        return a < b;
    });
    zh_.reserve(n);
    s_.reserve(n);
    zm_.reserve(n);
    zp_.reserve(n);
    for (std::size_t i : order) {
        zh_.push_back(z_head[i]);
        s_.push_back(s_next[i]);
        zm_.push_back(z_minus_next[i]);
        zp_.push_back(z_post_next[i]);
    }
    zm_sorted_ = zm_;
    std::sort(zm_sorted_.begin(), zm_sorted_.end());
}

ChainData ChainData::from(const Trajectory& traj) {
    const std::size_t n = traj.jumps();
    std::vector<double> heads(n);
    for (std::size_t i = 0; i < n; ++i) heads[i] = traj.head(i);
    return ChainData(std::move(heads), traj.s, traj.z_minus, traj.z);
}

double kernel_mean_sorted(const std::vector<double>& sorted, double c, double h,
                          const Kernel& kernel) {
    const double r = h * kernel.support_radius;
    const auto w = window(sorted, c - r, c + r);
    double sum = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        sum += kernel.eval((sorted[i] - c) / h);
    }
    return sum / (h * static_cast<double>(sorted.size()));
}

std::size_t denominator_count_k(const ChainData& chain, double x, double hx) {
    const auto& zh = chain.z_head_sorted();
    const auto& zp = chain.z_post_by_head();
    const auto end = std::upper_bound(zh.begin(), zh.end(), x) - zh.begin();
    std::size_t count = 0;
    for (std::ptrdiff_t i = 0; i < end; ++i) {
        if (zp[static_cast<std::size_t>(i)] >= hx) ++count;
    }
    return count;
}

std::size_t denominator_count_ks(const ChainData& chain, double x) {
    const auto& zh = chain.z_head_sorted();
    const auto& zm = chain.z_minus_by_head();
    const auto end = std::upper_bound(zh.begin(), zh.end(), x) - zh.begin();
    std::size_t count = 0;
    for (std::ptrdiff_t i = 0; i < end; ++i) {
        if (zm[static_cast<std::size_t>(i)] > x) ++count;
    }
    return count;
}

PointEstimate lambda_k(const ChainData& chain, double x, double h,
                       const ModelSpec& model, const Kernel& kernel) {
    if (!(h > 0.0)) throw ParameterOutOfRange("lambda_k: bandwidth must be positive");
    const auto& frag = model.fragmentation();
    const double hx = frag.h(x);
    const double n = static_cast<double>(chain.size());
    const double den = static_cast<double>(denominator_count_k(chain, x, hx)) / n;
    if (den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    const double num = kernel_mean_sorted(chain.z_head_sorted(), hx, h, kernel);
    const double pre = frag.h_prime(x) * model.flow.derivative_at_zero(x);
    return {pre * num / den, EstimateStatus::ok};
}

PointEstimate lambda_ks(const ChainData& chain, double x, double h,
                        const ModelSpec& model, const Kernel& kernel) {
    if (!(h > 0.0)) throw ParameterOutOfRange("lambda_ks: bandwidth must be positive");
    const double n = static_cast<double>(chain.size());
    const double den = static_cast<double>(denominator_count_ks(chain, x)) / n;
    if (den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    const double num = kernel_mean_sorted(chain.z_minus_sorted(), x, h, kernel);
    return {model.flow.derivative_at_zero(x) * num / den, EstimateStatus::ok};
}

PointEstimate lambda_circ_phi(const ChainData& chain, double xi, double t,
                              double hs, double ht, const Kernel& kernel) {
    if (!(hs > 0.0 && ht > 0.0)) {
        throw ParameterOutOfRange("lambda_circ_phi: bandwidths must be positive");
    }
    if (t < 0.0) throw ParameterOutOfRange("lambda_circ_phi: t must be nonnegative");
    const auto& zh = chain.z_head_sorted();
    const auto& s = chain.s_by_head();
    const double r = hs * kernel.support_radius;
    const auto w = window(zh, xi - r, xi + r);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        const double ws = kernel.eval((zh[i] - xi) / hs) / hs;
        if (ws == 0.0) continue;
        if (s[i] > t) den += ws;
        num += ws * kernel.eval((s[i] - t) / ht) / ht;
    }
    const double n = static_cast<double>(chain.size());
    den /= n;
    num /= n;
    if (den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    return {num / den, EstimateStatus::ok};
}

namespace {

// Grid candidates whose flow time to x stays within the horizon. tau_x is
// decreasing in xi, so the admissible set is a suffix of the grid.
std::vector<double> cx_candidates(const theory::CxGrid& cx, double x,
                                  const FlowSpec& flow) {
    auto pts = cx.points(x);
    std::size_t first = 0;
    while (first < pts.size() &&
           flow.inverse_time(pts[first], x) > cx.t_max + 1e-12) {
        ++first;
    }
    if (first == pts.size() && !pts.empty()) first = pts.size() - 1;
    return std::vector<double>(pts.begin() + static_cast<long>(first), pts.end());
}

} // namespace

double oracle_argmax(double x, const FlowSpec& flow, const OracleHandles& oracle,
                     const theory::CxGrid& cx) {
    const auto pts = cx_candidates(cx, x, flow);
    if (pts.empty()) throw DegenerateDenominator("oracle_argmax: empty C_x grid");
    double best = 0.0;
    double best_xi = 0.0;
    bool found = false;
    for (double xi : pts) {
        const double crit = oracle.mu(xi) * oracle.survival(xi, flow.inverse_time(xi, x));
        if (!found || crit > best) {
            best = crit;
            best_xi = xi;
            found = true;
        }
    }
    if (!(best > 0.0)) {
        throw DegenerateDenominator("oracle_argmax: criterion vanishes on the C_x grid");
    }
    return best_xi;
}

std::vector<double> amg_criterion(const ChainData& chain, double x, double hs,
                                  const Kernel& kernel, const FlowSpec& flow,
                                  const std::vector<double>& xi_grid) {
    const auto& zh = chain.z_head_sorted();
    const auto& s = chain.s_by_head();
    const double r = hs * kernel.support_radius;
    std::vector<double> crit(xi_grid.size(), 0.0);
    for (std::size_t j = 0; j < xi_grid.size(); ++j) {
        const double xi = xi_grid[j];
        const double t = flow.inverse_time(xi, x);
        const auto w = window(zh, xi - r, xi + r);
        double sum = 0.0;
        for (std::size_t i = w.lo; i < w.hi; ++i) {
            if (s[i] > t) sum += kernel.eval((zh[i] - xi) / hs) / hs;
        }
        crit[j] = sum;
    }
    return crit;
}

double amg_argmax(const ChainData& chain, double x, double hs, const Kernel& kernel,
                  const FlowSpec& flow, const theory::CxGrid& cx) {
    const auto pts = cx_candidates(cx, x, flow);
    if (pts.empty()) throw DegenerateDenominator("amg_argmax: empty C_x grid");
    const auto crit = amg_criterion(chain, x, hs, kernel, flow, pts);
    std::size_t best = 0;
    for (std::size_t j = 1; j < crit.size(); ++j) {
        if (crit[j] > crit[best]) best = j;
    }
    if (crit[best] <= kDenominatorGuard) {
        throw DegenerateDenominator("amg_argmax: criterion vanishes on the C_x grid");
    }
    return pts[best];
}

PointEstimate lambda_amgo(const ChainData& chain, double x, double hs, double ht,
                          const Kernel& kernel, const FlowSpec& flow,
                          const OracleHandles& oracle, const theory::CxGrid& cx) {
    if (!(x > 0.0)) throw ParameterOutOfRange("lambda_amgo: x must be positive");
    double xi;
    try {
        xi = oracle_argmax(x, flow, oracle, cx);
    } catch (const DegenerateDenominator&) {
        return {0.0, EstimateStatus::degenerate_criterion};
    }
    return lambda_circ_phi(chain, xi, flow.inverse_time(xi, x), hs, ht, kernel);
}

PointEstimate lambda_amg(const ChainData& chain, double x, double hs, double ht,
                         const Kernel& kernel, const FlowSpec& flow,
                         const theory::CxGrid& cx) {
    if (!(x > 0.0)) throw ParameterOutOfRange("lambda_amg: x must be positive");
    double xi;
    try {
        xi = amg_argmax(chain, x, hs, kernel, flow, cx);
    } catch (const DegenerateDenominator&) {
        return {0.0, EstimateStatus::degenerate_criterion};
    }
    return lambda_circ_phi(chain, xi, flow.inverse_time(xi, x), hs, ht, kernel);
}

PointEstimate lambda_k(const Trajectory& traj, double x, double h,
                       const ModelSpec& model, const Kernel& kernel) {
    return lambda_k(ChainData::from(traj), x, h, model, kernel);
}

PointEstimate lambda_ks(const Trajectory& traj, double x, double h,
                        const ModelSpec& model, const Kernel& kernel) {
    return lambda_ks(ChainData::from(traj), x, h, model, kernel);
}

CircPhiProfile circ_phi_profile(const ChainData& chain, double xi, double t,
                                double hs, const Kernel& kernel, double ht_max) {
    const auto& zh = chain.z_head_sorted();
    const auto& s = chain.s_by_head();
    const double r = hs * kernel.support_radius;
    const auto w = window(zh, xi - r, xi + r);
    CircPhiProfile p;
    p.t = t;
    p.n = chain.size();
    const double reach = ht_max * kernel.support_radius;
    std::vector<std::pair<double, double>> entries; // (s - t, weight)
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        const double ws = kernel.eval((zh[i] - xi) / hs) / hs;
        if (ws == 0.0) continue;
        if (s[i] > t) p.den += ws;
        if (std::abs(s[i] - t) <= reach) {
            entries.emplace_back(s[i] - t, ws);
        }
    }
    p.den /= static_cast<double>(p.n);
    std::sort(entries.begin(), entries.end());
    p.d.reserve(entries.size());
    p.w.reserve(entries.size());
    p.pw.assign(1, 0.0);
    p.pwd2.assign(1, 0.0);
    for (const auto& [d, ws] : entries) {
        p.d.push_back(d);
        p.w.push_back(ws);
        p.pw.push_back(p.pw.back() + ws);
        p.pwd2.push_back(p.pwd2.back() + ws * d * d);
    }
    return p;
}

PointEstimate circ_phi_at(const CircPhiProfile& profile, double ht,
                          const Kernel& kernel) {
    if (profile.den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    const auto w = window(profile.d, -ht * kernel.support_radius,
                          ht * kernel.support_radius);
    double num;
    if (kernel.eval == &epan_eval) {
        const double w0 = profile.pw[w.hi] - profile.pw[w.lo];
        const double d2 = profile.pwd2[w.hi] - profile.pwd2[w.lo];
        num = 0.75 / ht * (w0 - d2 / (ht * ht));
    } else {
        num = 0.0;
        for (std::size_t i = w.lo; i < w.hi; ++i) {
            num += profile.w[i] * kernel.eval(profile.d[i] / ht) / ht;
        }
    }
    num /= static_cast<double>(profile.n);
    return {num / profile.den, EstimateStatus::ok};
}

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::k: return "k";
        case EstimatorKind::ks: return "ks";
        case EstimatorKind::amgo: return "amgo";
        case EstimatorKind::amg: return "amg";
        case EstimatorKind::adaptive_k: return "adaptive-k";
        case EstimatorKind::adaptive_ks: return "adaptive-ks";
    }
    return "?";
}

const char* to_string(EstimateStatus s) {
    switch (s) {
        case EstimateStatus::ok: return "ok";
        case EstimateStatus::denominator_zero: return "denominator_zero";
        case EstimateStatus::degenerate_criterion: return "degenerate_criterion";
        case EstimateStatus::outside_projection_interval:
            return "outside_projection_interval";
        case EstimateStatus::negative_numerator: return "negative_numerator";
    }
    return "?";
}

std::vector<std::size_t> EstimateCurve::failures() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < status.size(); ++i) {
        if (status[i] != EstimateStatus::ok) idx.push_back(i);
    }
    return idx;
}

EstimateCurve estimate_curve(EstimatorKind kind, const ChainData& chain,
                             const std::vector<double>& grid, Bandwidths bw,
                             const ModelSpec& model, const Kernel& kernel,
                             const OracleHandles* oracle, const theory::CxGrid& cx) {
    EstimateCurve curve;
    curve.grid = grid;
    curve.kind = kind;
    curve.bandwidths = bw;
    curve.n = chain.size();
    curve.values.reserve(grid.size());
    curve.status.reserve(grid.size());
    for (double x : grid) {
        PointEstimate p;
        switch (kind) {
            case EstimatorKind::k:
                p = lambda_k(chain, x, bw.h, model, kernel);
                break;
            case EstimatorKind::ks:
                p = lambda_ks(chain, x, bw.h, model, kernel);
                break;
            case EstimatorKind::amgo:
                if (oracle == nullptr) {
                    throw ParameterOutOfRange("estimate_curve: amgo requires oracle handles");
                }
                p = lambda_amgo(chain, x, bw.hs, bw.ht, kernel, model.flow, *oracle, cx);
                break;
            case EstimatorKind::amg:
                p = lambda_amg(chain, x, bw.hs, bw.ht, kernel, model.flow, cx);
                break;
            default:
                throw ParameterOutOfRange("estimate_curve: adaptive kinds live in the adaptive module");
        }
        curve.values.push_back(p.value);
        curve.status.push_back(p.status);
    }
    return curve;
}

void write_curve_csv(const EstimateCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "x,estimate,failed\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        out << csv::fmt17(curve.grid[i]) << ',' << csv::fmt17(curve.values[i]) << ','
            << (curve.status[i] == EstimateStatus::ok ? 0 : 1) << '\n';
    }
}

} // namespace pdmp
