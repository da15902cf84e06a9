#ifndef PDMP_NUMERICS_HPP
#define PDMP_NUMERICS_HPP

#include <functional>
#include <vector>

namespace pdmp::num {

// Adaptive Simpson quadrature. The effective tolerance is
// max(abs_tol, rel_tol * |first whole-interval estimate|); the relative part
// keeps hazard integrals with huge magnitudes (where only the order matters)
// within double precision. Throws QuadratureFailure if the recursion depth
// limit is reached first.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-9, int max_depth = 40, double rel_tol = 1e-12);

// Smallest t in [0, hi] with g(t) >= target, located by bisection on a
// bracket [lo, hi] where g(lo) < target <= g(hi). g must be nondecreasing.
double bisect_nondecreasing(const std::function<double(double)>& g,
                            double lo, double hi, double target,
                            double tol = 1e-10);

// One-sample Kolmogorov-Smirnov distance between sorted samples and cdf
// values aligned with them (cdf_at[i] = F(sample_(i))).
double ks_distance_sorted(const std::vector<double>& cdf_at);

// Two-sample Kolmogorov-Smirnov distance. Inputs need not be sorted.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Median of an unsorted sample (even size: mean of the middle pair).
double median(std::vector<double> v);

double quantile(std::vector<double> v, double p);

// Ordinary least squares slope/intercept of y against x.
struct LineFit {
    double slope;
    double intercept;
};
LineFit ols(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> uniform_grid(double lo, double hi, double step);

} // namespace pdmp::num

#endif
