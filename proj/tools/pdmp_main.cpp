// pdmp: simulation and jump-rate inference for one-dimensional
// piecewise-deterministic Markov processes.

#include "pdmp/adaptive.hpp"
#include "pdmp/csv.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/estimators.hpp"
#include "pdmp/experiments.hpp"
#include "pdmp/model.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/realdata.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/theory.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kArtifactVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct ManifestWriter {
    std::string subcommand;
    json config;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const fs::path& path) const {
        json m;
        m["subcommand"] = subcommand;
        m["config"] = config;
        m["config_hash"] = fnv1a(config.dump());
        m["seed"] = seed;
        m["artifact_version"] = kArtifactVersion;
        m["outputs"] = outputs;
        m["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count();
        std::ofstream out(path);
        if (!out) throw pdmp::Error("cannot open " + path.string() + " for writing");
        out << m.dump(2) << '\n';
    }
};

std::vector<double> parse_grid_spec(const std::string& text) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0 ||
        hi < lo) {
        throw pdmp::ParameterOutOfRange("grid must be lo:hi:step with step>0, got '" +
                                        text + "'");
    }
    return pdmp::num::uniform_grid(lo, hi, step);
}

pdmp::EstimateCurve read_curve_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw pdmp::Error("FileNotFound: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || pdmp::csv::split_line(line) !=
                                       std::vector<std::string>{"x", "estimate", "failed"}) {
        throw pdmp::ParseError(path.string() + ": expected header x,estimate,failed");
    }
    pdmp::EstimateCurve curve;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = pdmp::csv::split_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3) throw pdmp::ParseError(ctx + ": expected 3 fields");
        curve.grid.push_back(pdmp::csv::parse_field(fields[0], ctx));
        curve.values.push_back(pdmp::csv::parse_field(fields[1], ctx));
        curve.status.push_back(fields[2] == "0" ? pdmp::EstimateStatus::ok
                                                : pdmp::EstimateStatus::denominator_zero);
    }
    return curve;
}

struct ModelFlags {
    std::string kind = "tcp";
    double kappa = 0.4;
    double theta = 0.025;
    double ratio_mean = 0.5;
    double ratio_sd = 0.04;
    std::string rate_curve;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", kind, "model kind: tcp or growth")
            ->check(CLI::IsMember({"tcp", "growth"}));
        cmd->add_option("--kappa", kappa, "tcp fragmentation ratio");
        cmd->add_option("--theta", theta, "growth slope (per minute)");
        cmd->add_option("--ratio-mean", ratio_mean, "growth division ratio mean");
        cmd->add_option("--ratio-sd", ratio_sd, "growth division ratio sd");
        cmd->add_option("--rate-curve", rate_curve,
                        "CSV rate curve to attach (required for growth)");
    }

    pdmp::ModelSpec build() const {
        if (kind == "tcp") {
            pdmp::ModelSpec m = pdmp::tcp_model(kappa);
            if (!rate_curve.empty()) {
                const auto curve = read_curve_csv(rate_curve);
                std::vector<double> g, v;
                for (std::size_t i = 0; i < curve.grid.size(); ++i) {
                    if (curve.status[i] == pdmp::EstimateStatus::ok) {
                        g.push_back(curve.grid[i]);
                        v.push_back(curve.values[i]);
                    }
                }
                m = pdmp::attach_rate(std::move(m), pdmp::rate_from_curve(g, v));
            }
            return m;
        }
        pdmp::ModelSpec m = pdmp::growth_model(theta, ratio_mean, ratio_sd);
        if (!rate_curve.empty()) {
            const auto curve = read_curve_csv(rate_curve);
            std::vector<double> g, v;
            for (std::size_t i = 0; i < curve.grid.size(); ++i) {
                if (curve.status[i] == pdmp::EstimateStatus::ok) {
                    g.push_back(curve.grid[i]);
                    v.push_back(curve.values[i]);
                }
            }
            m = pdmp::attach_rate(std::move(m), pdmp::rate_from_curve(g, v));
        }
        return m;
    }

    json to_json() const {
        json j{{"kind", kind}};
        if (kind == "tcp") {
            j["kappa"] = kappa;
        } else {
            j["theta"] = theta;
            j["ratio_mean"] = ratio_mean;
            j["ratio_sd"] = ratio_sd;
        }
        if (!rate_curve.empty()) j["rate_curve"] = rate_curve;
        return j;
    }
};

int run_theory(double kappa, const std::string& grid_text, const std::string& out) {
    ManifestWriter manifest{"theory", json{{"kappa", kappa}, {"grid", grid_text}}, 0, {out}};
    const auto grid = parse_grid_spec(grid_text);
    const pdmp::Kernel kernel = pdmp::epanechnikov();
    std::ofstream file(out);
    if (!file) throw pdmp::Error("cannot open " + out + " for writing");
    file << "x,mu,mu_ct,mu_minus,sigma_k,sigma_ks,sigma_amg\n";
    auto sd_or_nan = [&](double (*sigma2)(double, double, double,
                                          pdmp::theory::SeriesTolerance),
                         double x) {
        try {
            return std::sqrt(sigma2(x, kappa, kernel.tau2, {}));
        } catch (const pdmp::Error&) {
            return std::nan("");
        }
    };
    for (double x : grid) {
        double amg = std::nan("");
        try {
            amg = std::sqrt(pdmp::theory::sigma_amg2(x, kappa, kernel.tau2));
        } catch (const pdmp::Error&) {
        }
        file << pdmp::csv::fmt17(x) << ',' << pdmp::csv::fmt17(pdmp::theory::tcp_mu(x, kappa))
             << ',' << pdmp::csv::fmt17(pdmp::theory::tcp_mu_ct(x, kappa)) << ','
             << pdmp::csv::fmt17(pdmp::theory::tcp_mu_minus(x, kappa)) << ','
             << pdmp::csv::fmt17(sd_or_nan(&pdmp::theory::sigma_k2, x)) << ','
             << pdmp::csv::fmt17(sd_or_nan(&pdmp::theory::sigma_ks2, x)) << ','
             << pdmp::csv::fmt17(amg) << '\n';
    }
    manifest.write(fs::path(out).string() + ".manifest.json");
    return 0;
}

int run_simulate(const ModelFlags& mf, double z0, std::size_t n, std::uint64_t seed,
                 const std::string& out, double grid_dt, const std::string& grid_out) {
    json cfg{{"model", mf.to_json()}, {"z0", z0}, {"n", n}, {"seed", seed}};
    ManifestWriter manifest{"simulate", cfg, seed, {out}};
    const pdmp::ModelSpec model = mf.build();
    const pdmp::Trajectory traj = pdmp::simulate_chain(model, z0, n, seed);
    pdmp::write_trajectory_csv(traj, out);
    if (!grid_out.empty()) {
        cfg["grid_dt"] = grid_dt;
        manifest.config = cfg;
        manifest.outputs.push_back(grid_out);
        const pdmp::GridSamples grid = pdmp::sample_grid(model, traj, grid_dt);
        pdmp::write_grid_csv(grid, grid_out, mf.kind == "growth");
    }
    manifest.write(fs::path(out).string() + ".manifest.json");
    return 0;
}

int run_estimate(const ModelFlags& mf, double z0, std::size_t n, std::uint64_t seed,
                 const std::string& estimator, double bandwidth, double bandwidth_s,
                 double bandwidth_t, const std::string& grid_text, const std::string& out) {
    json cfg{{"model", mf.to_json()}, {"z0", z0},   {"n", n},
             {"seed", seed},          {"estimator", estimator}, {"grid", grid_text}};
    ManifestWriter manifest{"estimate", cfg, seed, {out}};
    const pdmp::ModelSpec model = mf.build();
    const pdmp::Trajectory traj = pdmp::simulate_chain(model, z0, n, seed);
    const pdmp::ChainData chain = pdmp::ChainData::from(traj);
    const auto grid = parse_grid_spec(grid_text);
    const pdmp::Kernel kernel = pdmp::epanechnikov();

    pdmp::EstimatorKind kind;
    pdmp::Bandwidths bw;
    std::optional<pdmp::OracleHandles> oracle;
    if (estimator == "k" || estimator == "ks") {
        kind = estimator == "k" ? pdmp::EstimatorKind::k : pdmp::EstimatorKind::ks;
        if (!(bandwidth > 0)) {
            throw pdmp::ParameterOutOfRange("--bandwidth is required for k/ks");
        }
        bw.h = bandwidth;
    } else {
        kind = estimator == "amgo" ? pdmp::EstimatorKind::amgo : pdmp::EstimatorKind::amg;
        if (!(bandwidth_s > 0 && bandwidth_t > 0)) {
            throw pdmp::ParameterOutOfRange(
                "--bandwidth-s and --bandwidth-t are required for amgo/amg");
        }
        bw.hs = bandwidth_s;
        bw.ht = bandwidth_t;
        if (kind == pdmp::EstimatorKind::amgo) {
            if (mf.kind != "tcp") {
                throw pdmp::ParameterOutOfRange(
                    "amgo needs the closed-form invariant law; only tcp has one");
            }
            const double kappa = mf.kappa;
            oracle = pdmp::OracleHandles{
                [kappa](double xi) { return pdmp::theory::tcp_mu(xi, kappa); },
                [](double xi, double t) { return std::exp(-(xi * t + 0.5 * t * t)); },
            };
        }
    }
    const pdmp::EstimateCurve curve = pdmp::estimate_curve(
        kind, chain, grid, bw, model, kernel, oracle ? &*oracle : nullptr);
    pdmp::write_curve_csv(curve, out);
    manifest.write(fs::path(out).string() + ".manifest.json");
    return 0;
}

int run_adaptive(const ModelFlags& mf, double z0, std::size_t n, std::uint64_t seed,
                 const std::string& estimator, double a, double b, std::size_t mbar,
                 double c, const std::string& grid_text, const std::string& out) {
    json cfg{{"model", mf.to_json()}, {"z0", z0}, {"n", n},       {"seed", seed},
             {"estimator", estimator}, {"a", a},  {"b", b},       {"mbar", mbar},
             {"c", c},                 {"grid", grid_text}};
    ManifestWriter manifest{"adaptive", cfg, seed, {out}};
    const pdmp::ModelSpec model = mf.build();
    const pdmp::Trajectory traj = pdmp::simulate_chain(model, z0, n, seed);
    const pdmp::ChainData chain = pdmp::ChainData::from(traj);
    const auto grid = parse_grid_spec(grid_text);
    const pdmp::adaptive::ProjectionParams params{a, b, mbar, c};
    const auto kind = estimator == "k" ? pdmp::EstimatorKind::adaptive_k
                                       : pdmp::EstimatorKind::adaptive_ks;
    const auto [curve, fit] = pdmp::adaptive::adaptive_curve(kind, chain, grid, model, params);
    pdmp::write_curve_csv(curve, out);
    const std::string fit_path = (fs::path(out).parent_path() / "fit.json").string();
    pdmp::adaptive::write_fit_json(fit, fit_path);
    manifest.outputs.push_back(fit_path);
    manifest.write(fs::path(out).string() + ".manifest.json");
    return 0;
}

int run_bench(const std::string& config_path, const std::string& outdir, int jobs_override) {
    pdmp::experiments::ExperimentConfig config =
        pdmp::experiments::config_from_json_file(config_path);
    if (jobs_override > 0) config.jobs = jobs_override;
    ManifestWriter manifest{"bench", json::parse(pdmp::experiments::config_to_json(config)),
                            config.seed, {}};
    fs::create_directories(outdir);
    pdmp::experiments::run_bench(config, outdir);
    for (const auto& entry : fs::directory_iterator(outdir)) {
        if (entry.path().filename() != "manifest.json") {
            manifest.outputs.push_back(entry.path().filename().string());
        }
    }
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    manifest.write(fs::path(outdir) / "manifest.json");
    return 0;
}

struct TemperatureDefaults {
    double h, hs, ht;
};

TemperatureDefaults defaults_for_temp(int temp) {
    switch (temp) {
        case 25: return {0.05, 0.06, 4.0};
        case 27: return {0.07, 0.08, 8.0};
        case 37: return {0.02, 0.03, 3.0};
        default:
            throw pdmp::ParameterOutOfRange("--temp must be one of 25, 27, 37");
    }
}

int run_realdata(const std::string& input, int temp, const std::string& method_name,
                 const std::string& outdir, double h_override, double hs_override,
                 double ht_override, std::uint64_t seed) {
    json cfg{{"input", input}, {"temp", temp}, {"method", method_name}, {"seed", seed}};
    ManifestWriter manifest{"realdata", cfg, seed, {}};
    const auto records = pdmp::realdata::parse_lineage_dir(input);
    const auto data = pdmp::realdata::extract_embedded(records);
    const double theta = data.theta_mean;
    const TemperatureDefaults defaults = defaults_for_temp(temp);

    pdmp::realdata::DivisionRateParams params;
    params.h = h_override > 0 ? h_override : defaults.h;
    params.hs = hs_override > 0 ? hs_override : defaults.hs;
    params.ht = ht_override > 0 ? ht_override : defaults.ht;

    pdmp::realdata::DivisionRateMethod method;
    if (method_name == "ks") {
        method = pdmp::realdata::DivisionRateMethod::ks;
    } else if (method_name == "adaptive-ks") {
        method = pdmp::realdata::DivisionRateMethod::adaptive_ks;
    } else if (method_name == "amg") {
        method = pdmp::realdata::DivisionRateMethod::amg;
    } else {
        throw pdmp::ParameterOutOfRange("--method must be ks, adaptive-ks or amg");
    }

    fs::create_directories(outdir);
    const fs::path out(outdir);

    const auto curve = pdmp::realdata::estimate_division_rate(data, theta, method, params);
    pdmp::write_curve_csv(curve, out / "rate_curve.csv");

    {
        std::ofstream chain_csv(out / "chain.csv");
        chain_csv << "pair,z,s,z_minus,z_post\n";
        for (std::size_t i = 0; i < data.pair_z.size(); ++i) {
            chain_csv << i << ',' << pdmp::csv::fmt17(data.pair_z[i]) << ','
                      << pdmp::csv::fmt17(data.pair_s[i]) << ','
                      << pdmp::csv::fmt17(data.pair_z_minus[i]) << ','
                      << pdmp::csv::fmt17(data.pair_z_post[i]) << '\n';
        }
    }

    const pdmp::ModelSpec fitted =
        pdmp::growth_model(theta, data.ratio_mean(), data.ratio_sd());
    const auto validation = pdmp::realdata::validate_posterior(
        fitted, curve, pdmp::realdata::pooled_sizes(records), seed);
    pdmp::realdata::write_validation_csv(validation, out / "validation.csv");

    {
        json tj;
        tj["theta"] = theta;
        tj["tau"] = data.mean_interjump();
        tj["ratio_mean"] = data.ratio_mean();
        tj["ratio_sd"] = data.ratio_sd();
        tj["lineages"] = records.size();
        tj["divisions"] = data.z.size();
        tj["boundary_divisions_dropped"] = data.boundary_divisions_dropped;
        tj["ks_distance"] = validation.ks_distance;
        std::ofstream theta_json(out / "theta.json");
        theta_json << tj.dump(2) << '\n';
    }

    manifest.outputs = {"theta.json", "chain.csv", "rate_curve.csv", "validation.csv"};
    manifest.write(out / "manifest.json");
    std::cout << "theta=" << theta << " divisions=" << data.z.size()
              << " ks=" << validation.ks_distance << '\n';
    return 0;
}

int run_validate(const std::string& data_dir, const std::string& theta_json_path,
                 const std::string& rate_curve_path, std::uint64_t seed,
                 const std::string& outdir) {
    json cfg{{"data", data_dir},
             {"theta_json", theta_json_path},
             {"rate_curve", rate_curve_path},
             {"seed", seed}};
    ManifestWriter manifest{"validate", cfg, seed, {"validation.csv"}};
    std::ifstream tin(theta_json_path);
    if (!tin) throw pdmp::Error("FileNotFound: cannot open " + theta_json_path);
    json tj;
    tin >> tj;
    const auto records = pdmp::realdata::parse_lineage_dir(data_dir);
    const auto curve = read_curve_csv(rate_curve_path);
    const pdmp::ModelSpec fitted = pdmp::growth_model(
        tj.at("theta").get<double>(), tj.at("ratio_mean").get<double>(),
        tj.at("ratio_sd").get<double>());
    const auto validation = pdmp::realdata::validate_posterior(
        fitted, curve, pdmp::realdata::pooled_sizes(records), seed);
    fs::create_directories(outdir);
    pdmp::realdata::write_validation_csv(validation, fs::path(outdir) / "validation.csv");
    manifest.write(fs::path(outdir) / "manifest.json");
    std::cout << "ks=" << validation.ks_distance << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and jump-rate estimation for 1-d PDMPs"};
    app.require_subcommand(1);

    // theory
    auto* theory_cmd = app.add_subcommand("theory", "closed-form TCP curves as CSV");
    double th_kappa = 0.4;
    std::string th_grid = "0.05:4:0.01";
    std::string th_out = "theory.csv";
    theory_cmd->add_option("--kappa", th_kappa);
    theory_cmd->add_option("--grid", th_grid, "state grid lo:hi:step");
    theory_cmd->add_option("--out", th_out)->required();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "simulate the embedded chain");
    ModelFlags sim_model;
    sim_model.attach(sim_cmd);
    double sim_z0 = 1.0;
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_out = "trajectory.csv";
    double sim_grid_dt = 1.0;
    std::string sim_grid_out;
    sim_cmd->add_option("--z0", sim_z0);
    sim_cmd->add_option("--n", sim_n)->required();
    sim_cmd->add_option("--seed", sim_seed)->required();
    sim_cmd->add_option("--out", sim_out)->required();
    sim_cmd->add_option("--grid-dt", sim_grid_dt, "time step for grid sampling");
    sim_cmd->add_option("--grid-out", sim_grid_out, "also export time,size,division CSV");

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "kernel jump-rate estimators");
    ModelFlags est_model;
    est_model.attach(est_cmd);
    double est_z0 = 1.0;
    std::size_t est_n = 10000;
    std::uint64_t est_seed = 1;
    std::string est_kind = "ks";
    double est_h = 0, est_hs = 0, est_ht = 0;
    std::string est_grid = "0.5:2.5:0.05";
    std::string est_out = "curve.csv";
    est_cmd->add_option("--z0", est_z0);
    est_cmd->add_option("--n", est_n)->required();
    est_cmd->add_option("--seed", est_seed)->required();
    est_cmd->add_option("--estimator", est_kind)
        ->check(CLI::IsMember({"k", "ks", "amgo", "amg"}));
    est_cmd->add_option("--bandwidth", est_h);
    est_cmd->add_option("--bandwidth-s", est_hs);
    est_cmd->add_option("--bandwidth-t", est_ht);
    est_cmd->add_option("--grid", est_grid);
    est_cmd->add_option("--out", est_out)->required();

    // adaptive
    auto* ad_cmd = app.add_subcommand("adaptive", "adaptive projection estimators");
    ModelFlags ad_model;
    ad_model.attach(ad_cmd);
    double ad_z0 = 1.0;
    std::size_t ad_n = 10000;
    std::uint64_t ad_seed = 1;
    std::string ad_kind = "ks";
    double ad_a = 0.05, ad_b = 3.0, ad_c = 1.0;
    std::size_t ad_mbar = 25;
    std::string ad_grid = "0.5:2.5:0.05";
    std::string ad_out = "adaptive_curve.csv";
    ad_cmd->add_option("--z0", ad_z0);
    ad_cmd->add_option("--n", ad_n)->required();
    ad_cmd->add_option("--seed", ad_seed)->required();
    ad_cmd->add_option("--estimator", ad_kind)->check(CLI::IsMember({"k", "ks"}));
    ad_cmd->add_option("--a", ad_a);
    ad_cmd->add_option("--b", ad_b);
    ad_cmd->add_option("--mbar", ad_mbar);
    ad_cmd->add_option("--c", ad_c);
    ad_cmd->add_option("--grid", ad_grid);
    ad_cmd->add_option("--out", ad_out)->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo benchmark harness");
    std::string bench_config;
    std::string bench_out = "bench_out";
    int bench_jobs = 0;
    bench_cmd->add_option("--config", bench_config)->required();
    bench_cmd->add_option("--out", bench_out)->required();
    bench_cmd->add_option("--jobs", bench_jobs, "worker threads (0 = hardware)");

    // realdata
    auto* rd_cmd = app.add_subcommand("realdata", "lineage CSV pipeline");
    std::string rd_input, rd_out = "realdata_out", rd_method = "ks";
    int rd_temp = 37;
    double rd_h = 0, rd_hs = 0, rd_ht = 0;
    std::uint64_t rd_seed = 1;
    rd_cmd->add_option("--input", rd_input)->required();
    rd_cmd->add_option("--temp", rd_temp)->check(CLI::IsMember({25, 27, 37}));
    rd_cmd->add_option("--method", rd_method)
        ->check(CLI::IsMember({"ks", "adaptive-ks", "amg"}));
    rd_cmd->add_option("--out", rd_out)->required();
    rd_cmd->add_option("--bandwidth", rd_h, "override the temperature default");
    rd_cmd->add_option("--bandwidth-s", rd_hs);
    rd_cmd->add_option("--bandwidth-t", rd_ht);
    rd_cmd->add_option("--seed", rd_seed);

    // validate
    auto* val_cmd = app.add_subcommand("validate", "a-posteriori validation");
    std::string val_data, val_theta, val_curve, val_out = "validate_out";
    std::uint64_t val_seed = 1;
    val_cmd->add_option("--data", val_data)->required();
    val_cmd->add_option("--theta-json", val_theta)->required();
    val_cmd->add_option("--rate-curve", val_curve)->required();
    val_cmd->add_option("--seed", val_seed);
    val_cmd->add_option("--out", val_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2; --help exits 0
    }

    try {
        if (theory_cmd->parsed()) return run_theory(th_kappa, th_grid, th_out);
        if (sim_cmd->parsed()) {
            return run_simulate(sim_model, sim_z0, sim_n, sim_seed, sim_out, sim_grid_dt,
                                sim_grid_out);
        }
        if (est_cmd->parsed()) {
            return run_estimate(est_model, est_z0, est_n, est_seed, est_kind, est_h,
                                est_hs, est_ht, est_grid, est_out);
        }
        if (ad_cmd->parsed()) {
            return run_adaptive(ad_model, ad_z0, ad_n, ad_seed, ad_kind, ad_a, ad_b,
                                ad_mbar, ad_c, ad_grid, ad_out);
        }
        if (bench_cmd->parsed()) return run_bench(bench_config, bench_out, bench_jobs);
        if (rd_cmd->parsed()) {
            return run_realdata(rd_input, rd_temp, rd_method, rd_out, rd_h, rd_hs, rd_ht,
                                rd_seed);
        }
        if (val_cmd->parsed()) {
            return run_validate(val_data, val_theta, val_curve, val_seed, val_out);
        }
    } catch (const pdmp::Error& e) {
        json err{{"error", "domain"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 2;
}
