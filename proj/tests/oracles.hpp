// Test-side oracles, independent of the library's estimator code paths:
// naive O(n^2)-style sums straight off the formulas, and quadrature CDFs.
#ifndef PDMP_TESTS_ORACLES_HPP
#define PDMP_TESTS_ORACLES_HPP

#include "pdmp/numerics.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

inline double epan(double u) { return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }

// Chain pieces in raw (unsorted) simulation order.
struct RawChain {
    std::vector<double> z_head, s_next, z_minus_next, z_post_next;

    static RawChain from(const pdmp::Trajectory& traj) {
        RawChain c;
        for (std::size_t i = 0; i < traj.jumps(); ++i) {
            c.z_head.push_back(traj.head(i));
            c.s_next.push_back(traj.s[i]);
            c.z_minus_next.push_back(traj.z_minus[i]);
            c.z_post_next.push_back(traj.z[i]);
        }
        return c;
    }

    std::size_t n() const { return z_head.size(); }
};

// Eq-by-eq transliterations of the estimators (no sorting, no windows).
inline double naive_lambda_k(const RawChain& c, double x, double h, double kappa) {
    const double hx = kappa * x;
    double num = 0.0;
    std::size_t den = 0;
    for (std::size_t i = 0; i < c.n(); ++i) {
        num += epan((c.z_head[i] - hx) / h) / h;
        if (c.z_head[i] <= x && c.z_post_next[i] >= hx) ++den;
    }
    if (den == 0) return std::nan("");
    return kappa * (num / static_cast<double>(c.n())) /
           (static_cast<double>(den) / static_cast<double>(c.n()));
}

inline double naive_lambda_ks(const RawChain& c, double x, double h, double delta) {
    double num = 0.0;
    std::size_t den = 0;
    for (std::size_t i = 0; i < c.n(); ++i) {
        num += epan((c.z_minus_next[i] - x) / h) / h;
        if (c.z_head[i] <= x && x < c.z_minus_next[i]) ++den;
    }
    if (den == 0) return std::nan("");
    return delta * (num / static_cast<double>(c.n())) /
           (static_cast<double>(den) / static_cast<double>(c.n()));
}

inline double naive_circ_phi(const RawChain& c, double xi, double t, double hs, double ht) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < c.n(); ++i) {
        const double ws = epan((c.z_head[i] - xi) / hs) / hs;
        num += ws * epan((c.s_next[i] - t) / ht) / ht;
        if (c.s_next[i] > t) den += ws;
    }
    if (den / static_cast<double>(c.n()) < 1e-12) return std::nan("");
    return num / den;
}

inline double naive_amg_criterion(const RawChain& c, double xi, double t, double hs) {
    double sum = 0.0;
    for (std::size_t i = 0; i < c.n(); ++i) {
        if (c.s_next[i] > t) sum += epan((c.z_head[i] - xi) / hs) / hs;
    }
    return sum;
}

// CDF of a density on [0, hi] by cumulative Simpson, evaluated at sorted
// query points (piecewise integration between consecutive queries).
inline std::vector<double> quadrature_cdf(const std::function<double(double)>& density,
                                          std::vector<double> sorted_queries,
                                          double lo = 0.0) {
    std::vector<double> out(sorted_queries.size());
    double acc = 0.0;
    double prev = lo;
    for (std::size_t i = 0; i < sorted_queries.size(); ++i) {
        const double q = sorted_queries[i];
        if (q > prev) {
            acc += pdmp::num::integrate(density, prev, q, 1e-10);
            prev = q;
        }
        out[i] = acc;
    }
    return out;
}

// KS distance between a sample and a density via the quadrature CDF.
inline double ks_vs_density(std::vector<double> sample,
                            const std::function<double(double)>& density) {
    std::sort(sample.begin(), sample.end());
    const auto cdf = quadrature_cdf(density, sample);
    return pdmp::num::ks_distance_sorted(cdf);
}

} // namespace oracles

#endif
