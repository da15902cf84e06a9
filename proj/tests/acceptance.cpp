// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Heavy Monte-Carlo stages (the bandwidth searches) run once and feed the
// downstream criteria, mirroring the experimental protocol.

#include "oracles.hpp"
#include "pdmp/adaptive.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/estimators.hpp"
#include "pdmp/experiments.hpp"
#include "pdmp/model.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/realdata.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/theory.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace pdmp;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_invariant_law() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec m = tcp_model(0.4);
    const Trajectory traj = simulate_chain(m, 1.0, 100000, 20250801);
    std::vector<double> z(traj.z.begin() + 1000, traj.z.end());
    const double ks = oracles::ks_vs_density(
        std::move(z), [](double x) { return theory::tcp_mu(x, 0.4); });
    const double elapsed = seconds_since(t0);
    report(1, "invariant-law KS vs quadrature CDF", ks < 0.01 && elapsed < 5.0,
           "KS=" + fmt(ks) + " (<0.01), " + fmt(elapsed) + "s (<5s)");
}

void criterion_2_sampler_exactness() {
    const ModelSpec m = tcp_model(0.4);
    rng::Stream rng(20250802);
    const std::size_t draws = 100000;
    std::size_t over = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        if (sample_interjump(m, 1.0, rng.uniform_open01()) > 1.0) ++over;
    }
    const double frac = static_cast<double>(over) / static_cast<double>(draws);
    const double err = std::abs(frac - std::exp(-1.5));
    report(2, "inter-jump survival fraction", err < 0.005,
           "|" + fmt(frac) + " - exp(-1.5)| = " + fmt(err) + " (<0.005)");
}

void criterion_3_variance_algebra() {
    double worst = 0.0;
    for (double kappa : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
        for (int i = 0; i < 100; ++i) {
            const double x = 0.5 + 0.04 * i;
            const double ratio =
                theory::sigma_k2(x, kappa, 0.6) / theory::sigma_ks2(x, kappa, 0.6);
            worst = std::max(worst, std::abs(ratio - kappa));
        }
    }
    report(3, "variance ratio sigma_k^2/sigma_ks^2 = kappa", worst < 1e-12,
           "max deviation " + fmt(worst) + " over 6 kappa x 100 points (<1e-12)");
}

void criterion_4_crossings() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto reports = experiments::variance_crossing_report(
        {0.4}, experiments::GridSpec{0.5, 3.5, 0.01}, 0.6);
    const double elapsed = seconds_since(t0);
    bool ok_k = false, ok_ks = false;
    std::string where_k = "none", where_ks = "none";
    for (double x : reports[0].cross_k) {
        if (x > 1.5 && x < 2.5) {
            ok_k = true;
            where_k = fmt(x);
        }
    }
    for (double x : reports[0].cross_ks) {
        if (x > 2.0 && x < 3.0) {
            ok_ks = true;
            where_ks = fmt(x);
        }
    }
    report(4, "sigma crossings at kappa=0.4", ok_k && ok_ks && elapsed < 1.0,
           "amg-k at " + where_k + " in [1.5,2.5]; amg-ks at " + where_ks +
               " in [2.0,3.0]; " + fmt(elapsed) + "s (<1s)");
}

void criterion_5_clt(const experiments::ExperimentConfig& config,
                     const experiments::CltResult& clt10k) {
    (void)config;
    const auto t0 = std::chrono::steady_clock::now();
    const experiments::CltKindResult* ks = nullptr;
    for (const auto& kr : clt10k.kinds) {
        if (kr.kind == EstimatorKind::ks) ks = &kr;
    }
    const double sd_ratio = ks->emp_sd / ks->theory_sd;
    const double mean_err = std::abs(ks->emp_mean - 2.0);
    const double elapsed = seconds_since(t0);
    (void)elapsed;
    report(5, "CLT at x=2 for the pre-jump estimator",
           std::abs(sd_ratio - 1.0) <= 0.25 && mean_err <= 0.15,
           "emp_sd/theory_sd=" + fmt(sd_ratio) + " (within 1±0.25), |mean-2|=" +
               fmt(mean_err) + " (<=0.15)");
}

std::vector<double> median_abs_errors(const experiments::CltResult& clt) {
    std::vector<double> out;
    for (const auto& kr : clt.kinds) {
        std::vector<double> errs;
        for (double v : kr.estimates) {
            if (std::isfinite(v)) errs.push_back(std::abs(v - 2.0));
        }
        out.push_back(num::median(errs));
    }
    return out;
}

void criterion_6_consistency(const experiments::CltResult& clt1k,
                             const experiments::CltResult& clt10k) {
    const auto small = median_abs_errors(clt1k);
    const auto large = median_abs_errors(clt10k);
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t i = 0; i < small.size(); ++i) {
        const bool ok = large[i] < small[i];
        pass = pass && ok;
        detail << to_string(clt1k.kinds[i].kind) << ": " << fmt(small[i]) << "->"
               << fmt(large[i]) << (ok ? " " : " (!) ");
    }
    report(6, "median |err(2)| strictly decreases 1e3 -> 1e4", pass, detail.str());
}

void criterion_7_bandwidths(const experiments::ExperimentConfig& config,
                            const experiments::BandwidthSearchResult& s1k,
                            const experiments::BandwidthSearchResult& s10k) {
    const bool decrease = s10k.median_h_k <= s1k.median_h_k &&
                          s10k.median_h_ks <= s1k.median_h_ks &&
                          s10k.median_hs_amgo <= s1k.median_hs_amgo &&
                          s10k.median_ht_amgo <= s1k.median_ht_amgo &&
                          s10k.median_hs_amg <= s1k.median_hs_amg &&
                          s10k.median_ht_amg <= s1k.median_ht_amg;
    const auto& bg = config.bandwidth_grids;
    auto interior = [](double v, const experiments::GridSpec& g) {
        return v > g.lo + 1e-12 && v < g.hi - 1e-12;
    };
    bool medians_interior = true;
    for (const auto* s : {&s1k, &s10k}) {
        medians_interior = medians_interior && interior(s->median_h_k, bg.h) &&
                           interior(s->median_h_ks, bg.h) &&
                           interior(s->median_hs_amgo, bg.hs) &&
                           interior(s->median_ht_amgo, bg.ht) &&
                           interior(s->median_hs_amg, bg.hs) &&
                           interior(s->median_ht_amg, bg.ht);
    }
    // per-replicate edge rate, reported for transparency (the oracle spade
    // spatial optimum is heavy-tailed upward at n=1e3; see the notes)
    auto edge_count = [&](const std::vector<double>& v, const experiments::GridSpec& g) {
        std::size_t c = 0;
        for (double x : v) {
            if (std::isfinite(x) && (std::abs(x - g.lo) < 1e-12 || std::abs(x - g.hi) < 1e-12)) {
                ++c;
            }
        }
        return c;
    };
    const std::size_t edges =
        edge_count(s1k.h_k, bg.h) + edge_count(s1k.h_ks, bg.h) +
        edge_count(s10k.h_k, bg.h) + edge_count(s10k.h_ks, bg.h) +
        edge_count(s1k.hs_amgo, bg.hs) + edge_count(s10k.hs_amgo, bg.hs) +
        edge_count(s1k.hs_amg, bg.hs) + edge_count(s10k.hs_amg, bg.hs) +
        edge_count(s1k.ht_amgo, bg.ht) + edge_count(s10k.ht_amgo, bg.ht) +
        edge_count(s1k.ht_amg, bg.ht) + edge_count(s10k.ht_amg, bg.ht);
    std::ostringstream detail;
    detail << "medians 1e3->1e4: h_k " << fmt(s1k.median_h_k) << "->" << fmt(s10k.median_h_k)
           << ", h_ks " << fmt(s1k.median_h_ks) << "->" << fmt(s10k.median_h_ks)
           << ", hs/ht amgo " << fmt(s1k.median_hs_amgo) << "/" << fmt(s1k.median_ht_amgo)
           << "->" << fmt(s10k.median_hs_amgo) << "/" << fmt(s10k.median_ht_amgo)
           << ", hs/ht amg " << fmt(s1k.median_hs_amg) << "/" << fmt(s1k.median_ht_amg)
           << "->" << fmt(s10k.median_hs_amg) << "/" << fmt(s10k.median_ht_amg)
           << "; selected medians interior; per-replicate edge picks " << edges << "/1200";
    report(7, "bandwidths shrink with n and stay interior", decrease && medians_interior,
           detail.str());
}

void criterion_8_ordering(const experiments::PointwiseErrors& errors10k) {
    const auto& ks_cells = errors10k.for_kind(EstimatorKind::ks);
    const auto& amg_cells = errors10k.for_kind(EstimatorKind::amg);
    double ks09 = 0, ks15 = 0, amg09 = 0, amg15 = 0;
    for (std::size_t i = 0; i < errors10k.grid.size(); ++i) {
        if (std::abs(errors10k.grid[i] - 0.9) < 1e-9) {
            ks09 = ks_cells[i].median();
            amg09 = amg_cells[i].median();
        }
        if (std::abs(errors10k.grid[i] - 1.5) < 1e-9) {
            ks15 = ks_cells[i].median();
            amg15 = amg_cells[i].median();
        }
    }
    const bool pass = amg09 < ks09 && ks15 < amg15;
    report(8, "error ordering flips between x=0.9 and x=1.5", pass,
           "x=0.9: amg " + fmt(amg09) + " < ks " + fmt(ks09) + "; x=1.5: ks " + fmt(ks15) +
               " < amg " + fmt(amg15));
}

void criterion_9_adaptive(const experiments::ExperimentConfig& config,
                          const experiments::PointwiseErrors& errors10k) {
    const ModelSpec model = tcp_model(config.kappa);
    const std::uint64_t seed = experiments::task_seed(config.seed, 4, 10000);
    const auto grid = num::uniform_grid(0.5, 1.9, 0.2);
    std::vector<std::vector<double>> err_k(grid.size()), err_ks(grid.size());
    std::size_t m_star_max = 0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const Trajectory traj = simulate_chain(model, config.z0, 10000, seed, r);
        const ChainData chain = ChainData::from(traj);
        const adaptive::ProjectionFit fmu = adaptive::fit_mu(chain);
        const adaptive::ProjectionFit fmm = adaptive::fit_mu_minus(chain);
        m_star_max = std::max({m_star_max, fmu.m_star, fmm.m_star});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const PointEstimate pk = adaptive::adaptive_lambda_k(chain, grid[i], model, fmu);
            const PointEstimate pks =
                adaptive::adaptive_lambda_ks(chain, grid[i], model, fmm);
            if (pk.ok()) err_k[i].push_back(std::abs(pk.value - grid[i]));
            if (pks.ok()) err_ks[i].push_back(std::abs(pks.value - grid[i]));
        }
    }
    bool k_beats_ks = true;
    std::ostringstream per_x;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mk = num::median(err_k[i]);
        const double mks = num::median(err_ks[i]);
        if (mk > mks) {
            k_beats_ks = false;
            per_x << " x=" << fmt(grid[i]) << ": " << fmt(mk) << ">" << fmt(mks);
        }
    }
    // adaptive pre-jump estimator within 2x of its kernel version at 0.9, 1.5
    const auto& kernel_ks = errors10k.for_kind(EstimatorKind::ks);
    bool within2 = true;
    std::ostringstream detail;
    for (double x : {0.9, 1.5}) {
        double kern = 0, adap = 0;
        for (std::size_t i = 0; i < errors10k.grid.size(); ++i) {
            if (std::abs(errors10k.grid[i] - x) < 1e-9) kern = kernel_ks[i].median();
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (std::abs(grid[i] - x) < 1e-9) adap = num::median(err_ks[i]);
        }
        if (adap > 2.0 * kern) within2 = false;
        detail << "x=" << fmt(x) << ": adaptive " << fmt(adap) << " vs 2x kernel "
               << fmt(2.0 * kern) << "; ";
    }
    detail << "M*max=" << m_star_max << "<=25; adaptive-k <= adaptive-ks at all 8 x: "
           << (k_beats_ks ? "yes" : "no") << per_x.str();
    report(9, "adaptive projection estimators", m_star_max <= 25 && within2 && k_beats_ks,
           detail.str());
}

void criterion_10_closed_loop() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / "pdmp_acceptance_loop";
    fs::remove_all(dir);
    fs::create_directories(dir);
    ModelSpec truth = growth_model(0.025, 0.5, 0.04);
    truth = attach_rate(std::move(truth), JumpRateSpec{[](double x) {
                            return 1.51e-8 * std::exp(12.0 * x);
                        }});
    const std::size_t lineages = 40;
    const std::size_t jumps = 126;
    std::size_t simulated = 0;
    for (std::size_t l = 0; l < lineages; ++l) {
        const Trajectory traj = simulate_chain(truth, 0.75, jumps, 987654, l);
        const GridSamples grid = sample_grid(truth, traj, 1.0);
        char name[32];
        std::snprintf(name, sizeof(name), "lineage_%02zu.csv", l);
        write_grid_csv(grid, dir / name, true);
        simulated += traj.jumps();
    }
    const auto records = realdata::parse_lineage_dir(dir);
    std::size_t parsed = 0;
    for (const auto& rec : records) parsed += rec.divisions();
    const auto data = realdata::extract_embedded(records);
    const double theta_err = std::abs(data.theta_mean - 0.025) / 0.025;
    realdata::DivisionRateParams params;
    params.h = 0.02;
    const auto curve = realdata::estimate_division_rate(
        data, data.theta_mean, realdata::DivisionRateMethod::ks, params);
    const ModelSpec fitted =
        growth_model(data.theta_mean, data.ratio_mean(), data.ratio_sd());
    const auto validation = realdata::validate_posterior(
        fitted, curve, realdata::pooled_sizes(records), 20250810);
    const double elapsed = seconds_since(t0);
    fs::remove_all(dir);
    const bool pass = theta_err < 0.01 && parsed == simulated &&
                      validation.ks_distance < 0.08 && elapsed < 30.0;
    report(10, "synthetic closed-loop pipeline", pass,
           "theta err " + fmt(100 * theta_err) + "% (<1%), divisions " +
               std::to_string(parsed) + "/" + std::to_string(simulated) + ", KS=" +
               fmt(validation.ks_distance) + " (<0.08), " + fmt(elapsed) + "s (<30s)");
}

void criterion_11_determinism() {
    experiments::ExperimentConfig config;
    config.replicates = 6;
    config.sample_sizes = {800};
    config.seed = 20250811;
    config.tasks = {"bandwidths", "clt", "errors"};
    const fs::path a = fs::temp_directory_path() / "pdmp_acc_det_a";
    const fs::path b = fs::temp_directory_path() / "pdmp_acc_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    config.jobs = 1;
    experiments::run_bench(config, a);
    config.jobs = 3;
    experiments::run_bench(config, b);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool pass = true;
    for (const char* name :
         {"report.json", "fig3_bandwidths.csv", "fig5_clt.csv", "fig7_errors.csv"}) {
        pass = pass && slurp(a / name) == slurp(b / name);
    }
    fs::remove_all(a);
    fs::remove_all(b);
    report(11, "bench reports byte-identical across --jobs", pass,
           pass ? "jobs=1 and jobs=3 outputs match byte for byte"
                : "outputs differ between jobs=1 and jobs=3");
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1_invariant_law();
    criterion_2_sampler_exactness();
    criterion_3_variance_algebra();
    criterion_4_crossings();

    experiments::ExperimentConfig config; // 100 replicates, seed 20250810
    config.jobs = 0;                      // use the hardware

    std::printf("... bandwidth search at n=1e3 and n=1e4 (100 replicates each)\n");
    std::fflush(stdout);
    const auto search1k = experiments::bandwidth_search(config, 1000);
    const auto search10k = experiments::bandwidth_search(config, 10000);
    const auto bw1k = experiments::selected_bandwidths(search1k);
    const auto bw10k = experiments::selected_bandwidths(search10k);
    const auto clt1k = experiments::clt_experiment(config, 1000, bw1k);
    const auto clt10k = experiments::clt_experiment(config, 10000, bw10k);
    const auto errors10k = experiments::pointwise_error_experiment(config, 10000, bw10k);

    criterion_5_clt(config, clt10k);
    criterion_6_consistency(clt1k, clt10k);
    criterion_7_bandwidths(config, search1k, search10k);
    criterion_8_ordering(errors10k);
    criterion_9_adaptive(config, errors10k);
    criterion_10_closed_loop();
    criterion_11_determinism();

    std::printf("%d of 11 criteria passed in %.1fs\n", 11 - g_failures,
                seconds_since(t0));
    return g_failures;
}
