#ifndef PDMP_ADAPTIVE_HPP
#define PDMP_ADAPTIVE_HPP

#include "pdmp/estimators.hpp"

#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

namespace pdmp::adaptive {

// Orthonormal trigonometric basis of L^2([a,b]), zero outside [a,b]:
// phi^0 = 1/sqrt(b-a), phi^{2j-1} = sqrt(2/(b-a)) cos(2 pi j (x-a)/(b-a)),
// phi^{2j} = sqrt(2/(b-a)) sin(2 pi j (x-a)/(b-a)).
double trig_basis(std::size_t m, double a, double b, double x);

// Empirical coefficients alpha_m = (1/n) sum_i phi^m(x_i) for m = 0..M.
// Samples outside [a,b] contribute zero but still count in n.
std::vector<double> projection_coeffs(const std::vector<double>& samples,
                                      std::size_t M, double a, double b);

struct ProjectionParams {
    double a = 0.05;
    double b = 3.0;
    std::size_t m_bar = 25;
    double c = 1.0;
};

struct ProjectionFit {
    double a = 0.0, b = 0.0;
    double c = 1.0;
    std::size_t m_bar = 0;
    std::size_t m_star = 0;
    std::size_t n = 0;
    std::vector<double> coeffs;   // length m_star + 1
    std::vector<double> contrast; // contrast value for each M = 0..m_bar

    double eval(double x) const;
};

// Penalized-contrast dimension selection:
//   M* = argmin_{0<=M<=Mbar}  ||muhat_M||^2 - (2/n) sum_i muhat_M(x_i) + c (M+1)/n.
// By orthonormality ||muhat_M||^2 = sum alpha_m^2 and the middle term equals
// 2 sum alpha_m^2, so the contrast reduces to -sum_{m<=M} alpha_m^2 + pen.
// Ties break toward smaller M.
ProjectionFit select_dimension(const std::vector<double>& samples,
                               ProjectionParams params = {});

// Fits of the post-jump / pre-jump invariant densities from a chain.
ProjectionFit fit_mu(const ChainData& chain, ProjectionParams params = {});
ProjectionFit fit_mu_minus(const ChainData& chain, ProjectionParams params = {});

// Fragmentation estimator with the kernel numerator replaced by the
// projection estimate of mu at h(x); denominator and prefactor unchanged.
PointEstimate adaptive_lambda_k(const ChainData& chain, double x,
                                const ModelSpec& model, const ProjectionFit& mu_fit);

// Pre-jump estimator with the projection estimate of mu^- at x.
PointEstimate adaptive_lambda_ks(const ChainData& chain, double x,
                                 const ModelSpec& model,
                                 const ProjectionFit& mu_minus_fit);

// Fit-internally conveniences matching the one-call operations.
PointEstimate adaptive_lambda_k(const ChainData& chain, double x,
                                const ModelSpec& model, ProjectionParams params);
PointEstimate adaptive_lambda_ks(const ChainData& chain, double x,
                                 const ModelSpec& model, ProjectionParams params);

// Curve over a grid; the fit is computed once and returned with the curve.
std::pair<EstimateCurve, ProjectionFit> adaptive_curve(EstimatorKind kind,
                                                       const ChainData& chain,
                                                       const std::vector<double>& grid,
                                                       const ModelSpec& model,
                                                       ProjectionParams params = {});

void write_fit_json(const ProjectionFit& fit, const std::filesystem::path& path);

} // namespace pdmp::adaptive

#endif
