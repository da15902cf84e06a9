#include "pdmp/numerics.hpp"

#include "pdmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace pdmp::num {

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b,
                     double fa, double fm, double fb, double whole, double tol,
                     int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    if (depth <= 0) {
        throw QuadratureFailure("adaptive Simpson: depth limit reached before tolerance");
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth, double rel_tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    return adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double bisect_nondecreasing(const std::function<double(double)>& g,
                            double lo, double hi, double target, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ks_distance_sorted(const std::vector<double>& cdf_at) {
    const std::size_t n = cdf_at.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(std::abs(cdf_at[i] - hi), std::abs(cdf_at[i] - lo)));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptySample("ks_two_sample: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double median(std::vector<double> v) {
    if (v.empty()) throw EmptySample("median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw EmptySample("quantile: empty input");
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw EmptySample("ols: need at least two aligned points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DegenerateDenominator("ols: zero variance in x");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const long count = std::lround((hi - lo) / step);
    g.reserve(static_cast<std::size_t>(count) + 1);
    for (long i = 0; i <= count; ++i) {
        g.push_back(lo + step * static_cast<double>(i));
    }
    return g;
}

} // namespace pdmp::num
