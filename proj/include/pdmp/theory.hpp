#ifndef PDMP_THEORY_HPP
#define PDMP_THEORY_HPP

#include "pdmp/model.hpp"

#include <vector>

namespace pdmp::theory {

// Truncation control for the invariant-density series. Terms shrink doubly
// exponentially once kappa^{-2n} dominates, so the defaults are generous.
struct SeriesTolerance {
    double abs_tol = 1e-12;
    int max_terms = 200;
};

// Invariant density of the embedded chain Z_n for the TCP model,
//   mu(x) = C * sum_{n>=1} [kappa^{-2n} / prod_{k=1}^{n-1}(1-kappa^{-2k})]
//           * x * exp(-kappa^{-2n} x^2 / 2),
// with C = 1/prod_{n>=1}(1-kappa^{2n}). The inner product is 1 for n=1.
double tcp_mu(double x, double kappa, SeriesTolerance tol = {});

// Invariant density of the continuous-time process X_t for the TCP model.
double tcp_mu_ct(double x, double kappa, SeriesTolerance tol = {});

// Invariant density of pre-jump locations: mu^-(x) = kappa * mu(kappa x).
double tcp_mu_minus(double x, double kappa, SeriesTolerance tol = {});

// Conditional survival function G(t|xi) = exp(-int_0^t lambda(Phi(s|xi)) ds).
// Uses the model's closed-form cumulative hazard when present, adaptive
// quadrature otherwise.
double survival_G(const ModelSpec& model, double xi, double t, double quad_tol = 1e-9);

// Conditional density f(t|xi) = lambda(Phi(t|xi)) G(t|xi) of the inter-jump
// time from xi.
double conditional_density_f(const ModelSpec& model, double xi, double t,
                             double quad_tol = 1e-9);

// Density of the pre-jump location Z_{n+1}^- given Z_n = x:
//   R(z|x) = lambda(z)/Delta(z) * exp(-int_x^z lambda(u)/Delta(u) du), z >= x.
double r_density(const ModelSpec& model, double x, double z, double quad_tol = 1e-9);

// Discretization of the argument-selection set for the conditional
// estimators: grid points xi in (0, x] whose flow time to x stays within
// t_max (the top of the time-bandwidth grid). Without the time horizon the
// criterion maximum freezes at the unconstrained argmax and the asymptotic
// variance ratios flatten, losing the crossings of the sigma curves.
struct CxGrid {
    double eps = 0.01;
    double step = 0.01;
    double t_max = 1.5;
    std::vector<double> points(double x) const;
    // grid restricted to xi >= xi_min
    std::vector<double> points_from(double x, double xi_min) const;
};

// Asymptotic variances at x for the TCP model (lambda(x) = x, h'(x) = kappa),
// from the central limit theorems for the three estimator families.
double sigma_k2(double x, double kappa, double tau2, SeriesTolerance tol = {});
double sigma_ks2(double x, double kappa, double tau2, SeriesTolerance tol = {});
double sigma_amg2(double x, double kappa, double tau2, const CxGrid& grid = {},
                  SeriesTolerance tol = {});

// Maximizer of mu(xi) G(tau_x(xi)|xi) over the C_x grid (the oracle argmax).
double tcp_oracle_argmax(double x, double kappa, const CxGrid& grid = {},
                         SeriesTolerance tol = {});

struct VarianceCurves {
    std::vector<double> grid;
    std::vector<double> sigma_k2;
    std::vector<double> sigma_ks2;
    std::vector<double> sigma_amg2;
    double tau2 = 0.0;
};

VarianceCurves variance_curves(std::vector<double> grid, double kappa, double tau2);

struct NormalizedSdCurves {
    std::vector<double> grid;
    std::vector<double> sd_k;
    std::vector<double> sd_ks;
    std::vector<double> sd_amg;
};

// Standard deviations normalized by the convergence rates:
// sqrt(sigma_k2/(n h_k)), sqrt(sigma_ks2/(n h_ks)), sqrt(sigma_amg2/(n hs ht)).
NormalizedSdCurves normalized_sd_curves(const VarianceCurves& curves, std::size_t n,
                                        double h_k, double h_ks, double h_s, double h_t);

} // namespace pdmp::theory

#endif
