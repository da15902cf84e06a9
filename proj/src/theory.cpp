#include "pdmp/theory.hpp"

#include "pdmp/errors.hpp"
#include "pdmp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmp::theory {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        std::ostringstream msg;
        msg << "tcp invariant density: kappa must lie in (0,1), got " << kappa;
        throw ParameterOutOfRange(msg.str());
    }
}

// prod_{n>=1} (1 - kappa^{2n})
double product_even(double kappa) {
    double p = 1.0;
    double f = kappa * kappa;
    while (f > 1e-18) {
        p *= 1.0 - f;
        f *= kappa * kappa;
    }
    return p;
}

// prod_{n>=0} (1 - kappa^{2n+1})
double product_odd(double kappa) {
    double p = 1.0;
    double f = kappa;
    while (f > 1e-18) {
        p *= 1.0 - f;
        f *= kappa * kappa;
    }
    return p;
}

} // namespace

double tcp_mu(double x, double kappa, SeriesTolerance tol) {
    check_kappa(kappa);
    if (x < 0.0) throw ParameterOutOfRange("tcp_mu: x must be nonnegative");
    const double q = 1.0 / (kappa * kappa);
    double coef = q;  // kappa^{-2n} / prod_{k=1}^{n-1} (1 - kappa^{-2k}), n = 1
    double qn = q;    // kappa^{-2n}
    double sum = 0.0;
    for (int n = 1; n <= tol.max_terms; ++n) {
        const double term = coef * x * std::exp(-0.5 * qn * x * x);
        sum += term;
        if (std::abs(term) < tol.abs_tol) {
            // the density is nonnegative; tiny negative values are
            // cancellation noise near x = 0 where the series telescopes
            return std::max(0.0, sum / product_even(kappa));
        }
        coef *= q / (1.0 - qn);
        qn *= q;
        if (qn > 1e300) {  // exp factor underflows to 0 for any x > 0
            return std::max(0.0, sum / product_even(kappa));
        }
    }
    throw SeriesDiverged("tcp_mu: term size still above abs_tol at max_terms");
}

double tcp_mu_ct(double x, double kappa, SeriesTolerance tol) {
    check_kappa(kappa);
    if (x < 0.0) throw ParameterOutOfRange("tcp_mu_ct: x must be nonnegative");
    const double q = 1.0 / (kappa * kappa);
    double coef = 1.0; // kappa^{-2n} / prod_{k=1}^{n} (1 - kappa^{-2k}), n = 0
    double qn = 1.0;
    double sum = 0.0;
    for (int n = 0; n <= tol.max_terms; ++n) {
        const double term = coef * std::exp(-0.5 * qn * x * x);
        sum += term;
        if (std::abs(term) < tol.abs_tol) {
            return std::max(0.0, sum * std::sqrt(2.0 / kPi) / product_odd(kappa));
        }
        qn *= q;
        coef *= q / (1.0 - qn);
    }
    throw SeriesDiverged("tcp_mu_ct: term size still above abs_tol at max_terms");
}

double tcp_mu_minus(double x, double kappa, SeriesTolerance tol) {
    return kappa * tcp_mu(kappa * x, kappa, tol);
}

double survival_G(const ModelSpec& model, double xi, double t, double quad_tol) {
    if (t < 0.0) throw ParameterOutOfRange("survival_G: t must be nonnegative");
    if (t == 0.0) return 1.0;
    if (model.cumulative_hazard) {
        return std::exp(-model.cumulative_hazard(xi, t));
    }
    if (!model.rate) throw ParameterOutOfRange("survival_G: model has no jump rate");
    const auto& rate = model.rate->eval;
    const auto& flow = model.flow.eval;
    const double hazard = num::integrate(
        [&](double s) { return rate(flow(s, xi)); }, 0.0, t, quad_tol);
    return std::exp(-hazard);
}

double conditional_density_f(const ModelSpec& model, double xi, double t,
                             double quad_tol) {
    if (!model.rate) throw ParameterOutOfRange("conditional_density_f: model has no jump rate");
    return model.rate->eval(model.flow.eval(t, xi)) * survival_G(model, xi, t, quad_tol);
}

double r_density(const ModelSpec& model, double x, double z, double quad_tol) {
    if (z < 0.0) throw ParameterOutOfRange("r_density: z must be nonnegative");
    if (z < x) return 0.0;
    if (!model.rate) throw ParameterOutOfRange("r_density: model has no jump rate");
    const auto& rate = model.rate->eval;
    const auto& delta = model.flow.derivative_at_zero;
    const double integral = num::integrate(
        [&](double u) { return rate(u) / delta(u); }, x, z, quad_tol);
    return rate(z) / delta(z) * std::exp(-integral);
}

std::vector<double> CxGrid::points(double x) const {
    return points_from(x, eps);
}

std::vector<double> CxGrid::points_from(double x, double xi_min) const {
    std::vector<double> pts;
    if (x + 1e-12 < eps) return pts;
    long first = 0;
    if (xi_min > eps) {
        first = static_cast<long>(std::ceil((xi_min - eps) / step - 1e-9));
    }
    const long last = static_cast<long>(std::floor((x - eps) / step + 1e-9));
    if (first > last) {
        // degenerate window; keep the single admissible point closest to x
        pts.push_back(eps + step * static_cast<double>(last));
        return pts;
    }
    pts.reserve(static_cast<std::size_t>(last - first) + 1);
    for (long j = first; j <= last; ++j) {
        // rounding can push the last node an ulp past x
        pts.push_back(std::min(x, eps + step * static_cast<double>(j)));
    }
    return pts;
}

double sigma_k2(double x, double kappa, double tau2, SeriesTolerance tol) {
    const double mu_minus = tcp_mu_minus(x, kappa, tol);
    if (!(mu_minus > 0.0)) {
        throw DegenerateDenominator("sigma_k2: mu^-(x) is not positive");
    }
    return tau2 * x * x * kappa / mu_minus;
}

double sigma_ks2(double x, double kappa, double tau2, SeriesTolerance tol) {
    const double mu_minus = tcp_mu_minus(x, kappa, tol);
    if (!(mu_minus > 0.0)) {
        throw DegenerateDenominator("sigma_ks2: mu^-(x) is not positive");
    }
    return tau2 * x * x / mu_minus;
}

namespace {

// criterion(xi) = mu(xi) G(tau_x(xi)|xi) with tau_x(xi) = x - xi and the TCP
// closed-form survival exp(-(xi t + t^2/2)).
double tcp_criterion_max(double x, double kappa, const CxGrid& grid,
                         SeriesTolerance tol, double* argmax) {
    const auto pts = grid.points_from(x, x - grid.t_max);
    if (pts.empty()) {
        throw DegenerateDenominator("sigma_amg2: empty C_x grid");
    }
    double best = -1.0;
    double best_xi = pts.front();
    for (double xi : pts) {
        const double t = x - xi;
        const double crit = tcp_mu(xi, kappa, tol) * std::exp(-(xi * t + 0.5 * t * t));
        if (crit > best) {
            best = crit;
            best_xi = xi;
        }
    }
    if (argmax != nullptr) *argmax = best_xi;
    return best;
}

} // namespace

double sigma_amg2(double x, double kappa, double tau2, const CxGrid& grid,
                  SeriesTolerance tol) {
    if (!(x > 0.0)) throw ParameterOutOfRange("sigma_amg2: x must be positive");
    const double best = tcp_criterion_max(x, kappa, grid, tol, nullptr);
    if (!(best > 0.0)) {
        throw DegenerateDenominator("sigma_amg2: criterion vanishes on the C_x grid");
    }
    return tau2 * tau2 * x / best;
}

double tcp_oracle_argmax(double x, double kappa, const CxGrid& grid,
                         SeriesTolerance tol) {
    if (!(x > 0.0)) throw ParameterOutOfRange("tcp_oracle_argmax: x must be positive");
    double best_xi = 0.0;
    const double best = tcp_criterion_max(x, kappa, grid, tol, &best_xi);
    if (!(best > 0.0)) {
        throw DegenerateDenominator("tcp_oracle_argmax: criterion vanishes on the C_x grid");
    }
    return best_xi;
}

VarianceCurves variance_curves(std::vector<double> grid, double kappa, double tau2) {
    VarianceCurves out;
    out.grid = std::move(grid);
    out.tau2 = tau2;
    out.sigma_k2.reserve(out.grid.size());
    out.sigma_ks2.reserve(out.grid.size());
    out.sigma_amg2.reserve(out.grid.size());
    for (double x : out.grid) {
        out.sigma_k2.push_back(sigma_k2(x, kappa, tau2));
        out.sigma_ks2.push_back(sigma_ks2(x, kappa, tau2));
        out.sigma_amg2.push_back(sigma_amg2(x, kappa, tau2));
    }
    return out;
}

NormalizedSdCurves normalized_sd_curves(const VarianceCurves& curves, std::size_t n,
                                        double h_k, double h_ks, double h_s, double h_t) {
    if (!(h_k > 0.0 && h_ks > 0.0 && h_s > 0.0 && h_t > 0.0)) {
        throw ParameterOutOfRange("normalized_sd_curves: bandwidths must be positive");
    }
    NormalizedSdCurves out;
    out.grid = curves.grid;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < curves.grid.size(); ++i) {
        out.sd_k.push_back(std::sqrt(curves.sigma_k2[i] / (dn * h_k)));
        out.sd_ks.push_back(std::sqrt(curves.sigma_ks2[i] / (dn * h_ks)));
        out.sd_amg.push_back(std::sqrt(curves.sigma_amg2[i] / (dn * h_s * h_t)));
    }
    return out;
}

} // namespace pdmp::theory
