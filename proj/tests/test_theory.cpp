#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/model.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/theory.hpp"

#include <cmath>

using namespace pdmp;
using theory::SeriesTolerance;

namespace {
const double kTau2 = 0.6;
}

TEST_CASE("tcp_mu vanishes at zero and normalizes") {
    CHECK(theory::tcp_mu(0.0, 0.4) == 0.0);
    // quadrature oracle on [0,8]; the Gaussian-type tail beyond 8 is far
    // below the tolerance
    const double integral =
        num::integrate([](double x) { return theory::tcp_mu(x, 0.4); }, 0.0, 8.0, 1e-10);
    CHECK(std::abs(integral - 1.0) < 1e-6);
}

TEST_CASE("tcp_mu normalizes across kappa") {
    for (double kappa : {0.3, 0.5, 0.8}) {
        const double hi = kappa < 0.6 ? 8.0 : 12.0;
        const double integral = num::integrate(
            [kappa](double x) { return theory::tcp_mu(x, kappa); }, 0.0, hi, 1e-10);
        CHECK(std::abs(integral - 1.0) < 1e-6);
    }
}

TEST_CASE("tcp_mu_ct normalizes and is positive") {
    const double integral =
        num::integrate([](double x) { return theory::tcp_mu_ct(x, 0.4); }, 0.0, 8.0, 1e-10);
    CHECK(std::abs(integral - 1.0) < 1e-6);
    for (double x = 0.05; x < 4.0; x += 0.05) {
        CHECK(theory::tcp_mu_ct(x, 0.4) > 0.0);
    }
}

TEST_CASE("mu_minus relation and normalization") {
    CHECK(theory::tcp_mu_minus(0.0, 0.4) == 0.0);
    CHECK(theory::tcp_mu_minus(1.0, 0.4) ==
          doctest::Approx(0.4 * theory::tcp_mu(0.4, 0.4)).epsilon(1e-15));
    for (int i = 1; i <= 50; ++i) {
        const double x = 0.1 * i;
        CHECK(std::abs(theory::tcp_mu_minus(x, 0.4) -
                       0.4 * theory::tcp_mu(0.4 * x, 0.4)) < 1e-12);
    }
    const double integral = num::integrate(
        [](double x) { return theory::tcp_mu_minus(x, 0.4); }, 0.0, 16.0, 1e-10);
    CHECK(std::abs(integral - 1.0) < 1e-6);
}

TEST_CASE("series truncation is stable") {
    const SeriesTolerance deep{1e-300, 200};
    for (double x = 0.0; x <= 6.0; x += 0.1) {
        CHECK(std::abs(theory::tcp_mu(x, 0.4) - theory::tcp_mu(x, 0.4, deep)) < 1e-10);
        CHECK(std::abs(theory::tcp_mu_ct(x, 0.4) - theory::tcp_mu_ct(x, 0.4, deep)) <
              1e-10);
    }
}

TEST_CASE("series diverges when starved of terms") {
    CHECK_THROWS_AS(theory::tcp_mu(1.0, 0.4, SeriesTolerance{1e-300, 2}), SeriesDiverged);
}

TEST_CASE("survival function closed form and quadrature path agree") {
    const ModelSpec closed = tcp_model(0.4);
    CHECK(theory::survival_G(closed, 1.0, 0.0) == 1.0);
    CHECK(theory::survival_G(closed, 1.0, 1.0) ==
          doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
    CHECK(theory::survival_G(closed, 1.0, 1.0) > theory::survival_G(closed, 1.0, 2.0));

    const ModelSpec generic =
        attach_rate(tcp_model(0.4), JumpRateSpec{[](double x) { return x; }});
    for (double t : {0.3, 1.0, 2.7}) {
        CHECK(std::abs(theory::survival_G(generic, 0.7, t) -
                       theory::survival_G(closed, 0.7, t)) < 1e-8);
    }
}

TEST_CASE("survival is log-concave along t for increasing hazard") {
    const ModelSpec m = tcp_model(0.4);
    double prev = 1.0;
    std::vector<double> logs;
    for (double t = 0.0; t <= 3.0; t += 0.1) {
        const double g = theory::survival_G(m, 1.0, t);
        if (t > 0.0) CHECK(g < prev);
        prev = g;
        logs.push_back(std::log(g));
    }
    for (std::size_t i = 2; i < logs.size(); ++i) {
        CHECK(logs[i] - 2.0 * logs[i - 1] + logs[i - 2] <= 1e-12);
    }
}

TEST_CASE("conditional density") {
    const ModelSpec m = tcp_model(0.4);
    for (double xi : {0.5, 1.0, 2.0}) {
        CHECK(theory::conditional_density_f(m, xi, 0.0) ==
              doctest::Approx(xi).epsilon(1e-12));
    }
    const double integral = num::integrate(
        [&](double t) { return theory::conditional_density_f(m, 1.0, t); }, 0.0, 10.0,
        1e-10);
    CHECK(std::abs(integral - 1.0) < 1e-6);
    for (double t : {0.2, 0.9, 1.7}) {
        const double ratio = theory::conditional_density_f(m, 1.0, t) /
                             theory::survival_G(m, 1.0, t);
        CHECK(ratio == doctest::Approx(1.0 + t).epsilon(1e-9));
    }
}

TEST_CASE("pre-jump conditional density R") {
    const ModelSpec m = tcp_model(0.4);
    CHECK(theory::r_density(m, 1.0, 0.5) == 0.0);
    const double integral = num::integrate(
        [&](double z) { return theory::r_density(m, 1.0, z); }, 1.0, 9.0, 1e-10);
    CHECK(std::abs(integral - 1.0) < 1e-6);
    for (double z : {1.0, 1.5, 2.5, 4.0}) {
        const double expected = z * std::exp(-(z * z - 1.0) / 2.0);
        CHECK(theory::r_density(m, 1.0, z) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("variance ratio between the fragmentation and pre-jump estimators") {
    for (double kappa : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
        for (int i = 0; i < 100; ++i) {
            const double x = 0.5 + 0.04 * i;
            const double ratio = theory::sigma_k2(x, kappa, kTau2) /
                                 theory::sigma_ks2(x, kappa, kTau2);
            CHECK(std::abs(ratio - kappa) < 1e-12);
        }
    }
}

TEST_CASE("degenerate variance denominators") {
    CHECK_THROWS_AS(theory::sigma_k2(0.0, 0.4, kTau2), DegenerateDenominator);
    CHECK_THROWS_AS(theory::sigma_amg2(0.0, 0.4, kTau2), ParameterOutOfRange);
}

TEST_CASE("sigma crossings land in the reported windows") {
    double prev_dk = 0, prev_dks = 0;
    bool have = false;
    std::vector<double> cross_k, cross_ks;
    for (double x = 0.5; x <= 3.5; x += 0.01) {
        const double sk = std::sqrt(theory::sigma_k2(x, 0.4, kTau2));
        const double sks = std::sqrt(theory::sigma_ks2(x, 0.4, kTau2));
        const double sa = std::sqrt(theory::sigma_amg2(x, 0.4, kTau2));
        if (have) {
            if ((prev_dk < 0) != (sa - sk < 0)) cross_k.push_back(x);
            if ((prev_dks < 0) != (sa - sks < 0)) cross_ks.push_back(x);
        }
        prev_dk = sa - sk;
        prev_dks = sa - sks;
        have = true;
    }
    REQUIRE(cross_k.size() == 1);
    REQUIRE(cross_ks.size() == 1);
    CHECK(cross_k.front() > 1.5);
    CHECK(cross_k.front() < 2.5);
    CHECK(cross_ks.front() > 2.0);
    CHECK(cross_ks.front() < 3.0);
}

TEST_CASE("oracle argmax matches direct grid maximization") {
    // independent re-maximization of mu(xi) exp(-(xi t + t^2/2)), t = x - xi
    const double x = 2.0;
    const theory::CxGrid grid;
    double best = -1.0, best_xi = 0.0;
    for (double xi = 0.01; xi <= x + 1e-12; xi += 0.01) {
        if (x - xi > grid.t_max) continue;
        const double t = x - xi;
        const double crit = theory::tcp_mu(xi, 0.4) * std::exp(-(xi * t + 0.5 * t * t));
        if (crit > best) {
            best = crit;
            best_xi = xi;
        }
    }
    const double got = theory::tcp_oracle_argmax(x, 0.4);
    CHECK(got == doctest::Approx(best_xi).epsilon(1e-12));
    CHECK(got > 0.0);
    CHECK(got < x);
}

TEST_CASE("variance curves are nonnegative and linked") {
    const auto curves =
        theory::variance_curves(num::uniform_grid(0.5, 3.0, 0.1), 0.4, kTau2);
    for (std::size_t i = 0; i < curves.grid.size(); ++i) {
        CHECK(curves.sigma_k2[i] >= 0.0);
        CHECK(curves.sigma_ks2[i] >= 0.0);
        CHECK(curves.sigma_amg2[i] >= 0.0);
        CHECK(curves.sigma_k2[i] ==
              doctest::Approx(0.4 * curves.sigma_ks2[i]).epsilon(1e-12));
    }
}

TEST_CASE("normalized curves scale with the sample size") {
    const auto curves =
        theory::variance_curves(num::uniform_grid(0.5, 2.5, 0.25), 0.4, kTau2);
    const auto a = theory::normalized_sd_curves(curves, 1000, 0.3, 0.3, 0.2, 0.6);
    const auto b = theory::normalized_sd_curves(curves, 10000, 0.3, 0.3, 0.2, 0.6);
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        CHECK(b.sd_k[i] == doctest::Approx(a.sd_k[i] / std::sqrt(10.0)).epsilon(1e-12));
        CHECK(b.sd_ks[i] == doctest::Approx(a.sd_ks[i] / std::sqrt(10.0)).epsilon(1e-12));
        CHECK(b.sd_amg[i] == doctest::Approx(a.sd_amg[i] / std::sqrt(10.0)).epsilon(1e-12));
        // fragmentation vs pre-jump normalized ratio is sqrt(kappa h_ks / h_k)
        CHECK(a.sd_k[i] / a.sd_ks[i] ==
              doctest::Approx(std::sqrt(0.4 * 0.3 / 0.3)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(theory::normalized_sd_curves(curves, 1000, 0.0, 0.3, 0.2, 0.6),
                    ParameterOutOfRange);
}
