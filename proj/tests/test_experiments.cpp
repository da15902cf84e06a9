#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/experiments.hpp"
#include "pdmp/model.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/theory.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdmp;
using namespace pdmp::experiments;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.replicates = 5;
    c.sample_sizes = {800};
    c.seed = 4242;
    c.jobs = 1;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("grid spec and task seeds") {
    const GridSpec g{0.5, 2.5, 0.5};
    const auto pts = g.points();
    REQUIRE(pts.size() == 5);
    CHECK(pts.front() == 0.5);
    CHECK(pts.back() == 2.5);
    CHECK(task_seed(1, 1, 1000) != task_seed(1, 2, 1000));
    CHECK(task_seed(1, 1, 1000) != task_seed(1, 1, 10000));
    CHECK(task_seed(1, 1, 1000) == task_seed(1, 1, 1000));
}

TEST_CASE("parallel_for is schedule independent") {
    std::vector<double> a(64), b(64);
    parallel_for(1, 64, [&](std::size_t i) { a[i] = std::sqrt(static_cast<double>(i)); });
    parallel_for(3, 64, [&](std::size_t i) { b[i] = std::sqrt(static_cast<double>(i)); });
    CHECK(a == b);
}

TEST_CASE("integrated square error") {
    EstimateCurve curve;
    curve.grid = num::uniform_grid(0.5, 2.5, 0.05);
    for (double x : curve.grid) {
        curve.values.push_back(x); // truth as curve
        curve.status.push_back(EstimateStatus::ok);
    }
    const auto exact = ise(curve, [](double x) { return x; });
    CHECK(exact.value == 0.0);
    CHECK(exact.excluded == 0);

    // constant offset: ise ~ (hi - lo) * eps^2 up to the grid-sum convention
    EstimateCurve offset = curve;
    for (double& v : offset.values) v += 0.1;
    const auto shifted = ise(offset, [](double x) { return x; });
    CHECK(std::abs(shifted.value - 2.0 * 0.01) <= 0.05 * 0.01 + 1e-12);

    // permutation of the curve points leaves the sum unchanged
    EstimateCurve shuffled = offset;
    std::reverse(shuffled.grid.begin(), shuffled.grid.end());
    std::reverse(shuffled.values.begin(), shuffled.values.end());
    const auto rev = ise(shuffled, [](double x) { return x; });
    CHECK(rev.value == doctest::Approx(shifted.value).epsilon(1e-12));

    // failures are excluded and reported; more than 20% raises CoverageGap
    EstimateCurve holey = offset;
    for (std::size_t i = 0; i < 5; ++i) holey.status[i] = EstimateStatus::denominator_zero;
    const auto partial = ise(holey, [](double x) { return x; });
    CHECK(partial.excluded == 5);
    CHECK(partial.value < shifted.value);
    for (std::size_t i = 5; i < 14; ++i) holey.status[i] = EstimateStatus::denominator_zero;
    CHECK_THROWS_AS(ise(holey, [](double x) { return x; }), CoverageGap);
}

TEST_CASE("bandwidth search is deterministic and stays on the grids") {
    const ExperimentConfig config = tiny_config();
    const auto r1 = bandwidth_search(config, 800);
    const auto r2 = bandwidth_search(config, 800);
    CHECK(r1.h_k == r2.h_k);
    CHECK(r1.hs_amg == r2.hs_amg);
    CHECK(r1.ht_amgo == r2.ht_amgo);
    REQUIRE(r1.h_k.size() == config.replicates);
    const auto& bg = config.bandwidth_grids;
    for (std::size_t r = 0; r < config.replicates; ++r) {
        if (std::isfinite(r1.h_k[r])) {
            CHECK(r1.h_k[r] >= bg.h.lo);
            CHECK(r1.h_k[r] <= bg.h.hi);
        }
        if (std::isfinite(r1.hs_amg[r])) {
            CHECK(r1.hs_amg[r] >= bg.hs.lo);
            CHECK(r1.hs_amg[r] <= bg.hs.hi);
            CHECK(r1.ht_amg[r] >= bg.ht.lo);
            CHECK(r1.ht_amg[r] <= bg.ht.hi);
        }
    }
    CHECK(r1.dropped_k + (config.replicates - r1.dropped_k) == config.replicates);
}

TEST_CASE("search optima match a brute-force pass over the public estimators") {
    // dual route: the tuned per-replicate search against direct ise() calls
    const ExperimentConfig config = tiny_config();
    const std::size_t n = 800;
    const auto fast = bandwidth_search(config, n);

    const ModelSpec model = tcp_model(config.kappa);
    const Kernel kernel = epanechnikov();
    const auto xs = config.ise_grid.points();
    const auto truth = [](double x) { return x; };
    const std::uint64_t seed = task_seed(config.seed, 1, n);
    const OracleHandles oracle{
        [&](double xi) { return theory::tcp_mu(xi, config.kappa); },
        [](double xi, double t) { return std::exp(-(xi * t + 0.5 * t * t)); },
    };

    for (std::size_t r = 0; r < 2; ++r) {
        const Trajectory traj = simulate_chain(model, config.z0, n, seed, r);
        const ChainData chain = ChainData::from(traj);

        auto best_scalar = [&](EstimatorKind kind) {
            double best = std::numeric_limits<double>::infinity();
            double best_h = std::nan("");
            for (double h : config.bandwidth_grids.h.points()) {
                const auto curve =
                    estimate_curve(kind, chain, xs, Bandwidths{h, 0, 0}, model, kernel);
                try {
                    const double val = ise(curve, truth).value;
                    if (val < best) {
                        best = val;
                        best_h = h;
                    }
                } catch (const CoverageGap&) {
                }
            }
            return best_h;
        };
        CHECK(best_scalar(EstimatorKind::k) == fast.h_k[r]);
        CHECK(best_scalar(EstimatorKind::ks) == fast.h_ks[r]);

        auto best_pair = [&](EstimatorKind kind) {
            double best = std::numeric_limits<double>::infinity();
            std::pair<double, double> best_hw{std::nan(""), std::nan("")};
            for (double hs : config.bandwidth_grids.hs.points()) {
                for (double ht : config.bandwidth_grids.ht.points()) {
                    const auto curve = estimate_curve(kind, chain, xs,
                                                      Bandwidths{0, hs, ht}, model,
                                                      kernel, &oracle);
                    try {
                        const double val = ise(curve, truth).value;
                        if (val < best) {
                            best = val;
                            best_hw = {hs, ht};
                        }
                    } catch (const CoverageGap&) {
                    }
                }
            }
            return best_hw;
        };
        const auto amgo = best_pair(EstimatorKind::amgo);
        CHECK(amgo.first == fast.hs_amgo[r]);
        CHECK(amgo.second == fast.ht_amgo[r]);
        const auto amg = best_pair(EstimatorKind::amg);
        CHECK(amg.first == fast.hs_amg[r]);
        CHECK(amg.second == fast.ht_amg[r]);
    }
}

TEST_CASE("clt experiment reports theory overlays") {
    ExperimentConfig config = tiny_config();
    config.replicates = 10;
    SelectedBandwidths bw;
    bw.k = Bandwidths{0.3, 0, 0};
    bw.ks = Bandwidths{0.45, 0, 0};
    bw.amgo = Bandwidths{0, 0.3, 0.65};
    bw.amg = Bandwidths{0, 0.3, 0.65};
    const CltResult clt = clt_experiment(config, 800, bw);
    REQUIRE(clt.kinds.size() == 4);
    for (const auto& kr : clt.kinds) {
        CHECK(kr.theory_mean == 2.0);
        CHECK(kr.theory_sd > 0.0);
        CHECK(kr.estimates.size() == config.replicates);
        CHECK(kr.failed <= config.replicates);
    }
    const CltResult again = clt_experiment(config, 800, bw);
    CHECK(clt.kinds[1].emp_mean == again.kinds[1].emp_mean);
    CHECK(clt.kinds[1].emp_sd == again.kinds[1].emp_sd);
}

TEST_CASE("pointwise error experiment accounts every replicate") {
    ExperimentConfig config = tiny_config();
    config.replicates = 8;
    SelectedBandwidths bw;
    bw.k = Bandwidths{0.3, 0, 0};
    bw.ks = Bandwidths{0.45, 0, 0};
    bw.amgo = Bandwidths{0, 0.3, 0.65};
    bw.amg = Bandwidths{0, 0.3, 0.65};
    const PointwiseErrors errors = pointwise_error_experiment(config, 800, bw);
    REQUIRE(errors.kinds.size() == 4);
    for (std::size_t k = 0; k < errors.kinds.size(); ++k) {
        for (std::size_t i = 0; i < errors.grid.size(); ++i) {
            const ErrorCell& cell = errors.cells[k][i];
            CHECK(cell.attempted == config.replicates);
            CHECK(cell.abs_errors.size() + cell.failed == cell.attempted);
            for (double e : cell.abs_errors) CHECK(e >= 0.0);
        }
    }
    CHECK(errors.for_kind(EstimatorKind::ks)[0].attempted == config.replicates);
    CHECK_THROWS_AS(errors.for_kind(EstimatorKind::adaptive_k), ParameterOutOfRange);
}

TEST_CASE("adaptive error experiment") {
    ExperimentConfig config = tiny_config();
    config.replicates = 6;
    const GridSpec grid{0.5, 1.9, 0.2};
    const PointwiseErrors errors = adaptive_error_experiment(config, 2000, grid);
    REQUIRE(errors.kinds.size() == 2);
    CHECK(errors.kinds[0] == EstimatorKind::adaptive_k);
    CHECK(errors.grid.size() == 8);
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < errors.grid.size(); ++i) {
            CHECK(errors.cells[k][i].attempted == config.replicates);
        }
    }
}

TEST_CASE("variance crossings at kappa 0.4") {
    const auto reports =
        variance_crossing_report({0.4}, GridSpec{0.5, 3.5, 0.01}, 0.6);
    REQUIRE(reports.size() == 1);
    REQUIRE(reports[0].cross_k.size() == 1);
    REQUIRE(reports[0].cross_ks.size() == 1);
    CHECK(reports[0].cross_k.front() > 1.5);
    CHECK(reports[0].cross_k.front() < 2.5);
    CHECK(reports[0].cross_ks.front() > 2.0);
    CHECK(reports[0].cross_ks.front() < 3.0);
}

TEST_CASE("config json round trip") {
    namespace fs = std::filesystem;
    ExperimentConfig config = tiny_config();
    config.kappa = 0.35;
    config.tasks = {"sigmas"};
    const fs::path path = fs::temp_directory_path() / "pdmp_config_test.json";
    {
        std::ofstream out(path);
        out << config_to_json(config);
    }
    const ExperimentConfig loaded = config_from_json_file(path);
    CHECK(loaded.kappa == config.kappa);
    CHECK(loaded.replicates == config.replicates);
    CHECK(loaded.seed == config.seed);
    CHECK(loaded.tasks == config.tasks);
    CHECK(loaded.jobs == 1); // jobs stays out of the canonical serialization
    fs::remove(path);
    CHECK_THROWS_AS(config_from_json_file("/nonexistent/config.json"), Error);
}

TEST_CASE("bench output bytes do not depend on the worker count") {
    namespace fs = std::filesystem;
    ExperimentConfig config = tiny_config();
    config.replicates = 4;
    config.sample_sizes = {600};
    config.tasks = {"bandwidths", "clt"};
    const fs::path out1 = fs::temp_directory_path() / "pdmp_bench_j1";
    const fs::path out2 = fs::temp_directory_path() / "pdmp_bench_j3";
    fs::remove_all(out1);
    fs::remove_all(out2);
    config.jobs = 1;
    run_bench(config, out1);
    config.jobs = 3;
    run_bench(config, out2);
    for (const char* name : {"fig3_bandwidths.csv", "fig5_clt.csv", "report.json"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    }
    fs::remove_all(out1);
    fs::remove_all(out2);
}
