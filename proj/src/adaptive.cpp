#include "pdmp/adaptive.hpp"

#include "pdmp/csv.hpp"
#include "pdmp/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace pdmp::adaptive {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDenominatorGuard = 1e-12;

} // namespace

double trig_basis(std::size_t m, double a, double b, double x) {
    if (!(a < b)) throw ParameterOutOfRange("trig_basis: need a < b");
    if (x < a || x > b) return 0.0;
    const double len = b - a;
    if (m == 0) return 1.0 / std::sqrt(len);
    const std::size_t j = (m + 1) / 2;
    const double arg = 2.0 * kPi * static_cast<double>(j) * (x - a) / len;
    const double amp = std::sqrt(2.0 / len);
    return (m % 2 == 1) ? amp * std::cos(arg) : amp * std::sin(arg);
}

std::vector<double> projection_coeffs(const std::vector<double>& samples,
                                      std::size_t M, double a, double b) {
    if (samples.empty()) throw EmptySample("projection_coeffs: empty sample");
    std::vector<double> coeffs(M + 1, 0.0);
    for (double x : samples) {
        if (x < a || x > b) continue;
        for (std::size_t m = 0; m <= M; ++m) {
            coeffs[m] += trig_basis(m, a, b, x);
        }
    }
    const double n = static_cast<double>(samples.size());
    for (double& c : coeffs) c /= n;
    return coeffs;
}

double ProjectionFit::eval(double x) const {
    if (x < a || x > b) return 0.0;
    double v = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        v += coeffs[m] * trig_basis(m, a, b, x);
    }
    return v;
}

ProjectionFit select_dimension(const std::vector<double>& samples,
                               ProjectionParams params) {
    const auto coeffs = projection_coeffs(samples, params.m_bar, params.a, params.b);
    const double n = static_cast<double>(samples.size());
    ProjectionFit fit;
    fit.a = params.a;
    fit.b = params.b;
    fit.c = params.c;
    fit.m_bar = params.m_bar;
    fit.n = samples.size();
    fit.contrast.resize(params.m_bar + 1);
    double norm2 = 0.0;
    for (std::size_t M = 0; M <= params.m_bar; ++M) {
        norm2 += coeffs[M] * coeffs[M];
        fit.contrast[M] = -norm2 + params.c * static_cast<double>(M + 1) / n;
    }
    std::size_t best = 0;
    for (std::size_t M = 1; M <= params.m_bar; ++M) {
        if (fit.contrast[M] < fit.contrast[best]) best = M;
    }
    fit.m_star = best;
    fit.coeffs.assign(coeffs.begin(), coeffs.begin() + static_cast<long>(best) + 1);
    return fit;
}

ProjectionFit fit_mu(const ChainData& chain, ProjectionParams params) {
    return select_dimension(chain.z_head_sorted(), params);
}

ProjectionFit fit_mu_minus(const ChainData& chain, ProjectionParams params) {
    return select_dimension(chain.z_minus_sorted(), params);
}

PointEstimate adaptive_lambda_k(const ChainData& chain, double x,
                                const ModelSpec& model, const ProjectionFit& mu_fit) {
    const auto& frag = model.fragmentation();
    const double hx = frag.h(x);
    if (hx < mu_fit.a || hx > mu_fit.b) {
        return {0.0, EstimateStatus::outside_projection_interval};
    }
    const double n = static_cast<double>(chain.size());
    const double den = static_cast<double>(denominator_count_k(chain, x, hx)) / n;
    if (den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    const double num = mu_fit.eval(hx);
    const double value = frag.h_prime(x) * model.flow.derivative_at_zero(x) * num / den;
    if (num < 0.0) return {value, EstimateStatus::negative_numerator};
    return {value, EstimateStatus::ok};
}

PointEstimate adaptive_lambda_ks(const ChainData& chain, double x,
                                 const ModelSpec& model,
                                 const ProjectionFit& mu_minus_fit) {
    if (x < mu_minus_fit.a || x > mu_minus_fit.b) {
        return {0.0, EstimateStatus::outside_projection_interval};
    }
    const double n = static_cast<double>(chain.size());
    const double den = static_cast<double>(denominator_count_ks(chain, x)) / n;
    if (den < kDenominatorGuard) return {0.0, EstimateStatus::denominator_zero};
    const double num = mu_minus_fit.eval(x);
    const double value = model.flow.derivative_at_zero(x) * num / den;
    if (num < 0.0) return {value, EstimateStatus::negative_numerator};
    return {value, EstimateStatus::ok};
}

PointEstimate adaptive_lambda_k(const ChainData& chain, double x,
                                const ModelSpec& model, ProjectionParams params) {
    return adaptive_lambda_k(chain, x, model, fit_mu(chain, params));
}

PointEstimate adaptive_lambda_ks(const ChainData& chain, double x,
                                 const ModelSpec& model, ProjectionParams params) {
    return adaptive_lambda_ks(chain, x, model, fit_mu_minus(chain, params));
}

std::pair<EstimateCurve, ProjectionFit> adaptive_curve(EstimatorKind kind,
                                                       const ChainData& chain,
                                                       const std::vector<double>& grid,
                                                       const ModelSpec& model,
                                                       ProjectionParams params) {
    if (kind != EstimatorKind::adaptive_k && kind != EstimatorKind::adaptive_ks) {
        throw ParameterOutOfRange("adaptive_curve: kind must be adaptive");
    }
    const ProjectionFit fit = kind == EstimatorKind::adaptive_k
                                  ? fit_mu(chain, params)
                                  : fit_mu_minus(chain, params);
    EstimateCurve curve;
    curve.grid = grid;
    curve.kind = kind;
    curve.n = chain.size();
    for (double x : grid) {
        const PointEstimate p = kind == EstimatorKind::adaptive_k
                                    ? adaptive_lambda_k(chain, x, model, fit)
                                    : adaptive_lambda_ks(chain, x, model, fit);
        curve.values.push_back(p.value);
        curve.status.push_back(p.status);
    }
    return {std::move(curve), fit};
}

void write_fit_json(const ProjectionFit& fit, const std::filesystem::path& path) {
    nlohmann::json j;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["c"] = fit.c;
    j["m_bar"] = fit.m_bar;
    j["m_star"] = fit.m_star;
    j["n"] = fit.n;
    j["coeffs"] = fit.coeffs;
    j["contrast"] = fit.contrast;
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace pdmp::adaptive
