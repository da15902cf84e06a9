#include "pdmp/realdata.hpp"

#include "pdmp/csv.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pdmp::realdata {

std::size_t LineageRecord::divisions() const {
    std::size_t c = 0;
    for (const auto& row : rows) {
        if (row.division) ++c;
    }
    return c;
}

LineageRecord parse_lineage(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound: cannot open " + path.string());
    LineageRecord record;
    record.lineage_id = path.stem().string();
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": empty file");
    }
    {
        const auto header = csv::split_line(line);
        if (header.size() != 3 || header[0] != "time" || header[1] != "size" ||
            header[2] != "division") {
            throw ParseError(path.string() + ": expected header time,size,division");
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = csv::split_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3) {
            throw ParseError(ctx + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        }
        LineageRow row;
        row.time = csv::parse_field(fields[0], ctx);
        row.size = csv::parse_field(fields[1], ctx);
        if (fields[2] == "0") {
            row.division = false;
        } else if (fields[2] == "1") {
            row.division = true;
        } else {
            throw ParseError(ctx + ": division flag must be 0 or 1, got '" + fields[2] + "'");
        }
        if (!(row.size > 0.0)) {
            throw NonPositiveSize(ctx + ": size must be positive, got " + fields[1]);
        }
        if (!record.rows.empty() && !(row.time > record.rows.back().time)) {
            throw NonMonotoneTime(ctx + ": time must be strictly increasing");
        }
        record.rows.push_back(row);
    }
    return record;
}

std::vector<LineageRecord> parse_lineage_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw Error("FileNotFound: " + dir.string() + " is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("FileNotFound: no .csv files in " + dir.string());
    std::vector<LineageRecord> records;
    records.reserve(files.size());
    for (const auto& f : files) records.push_back(parse_lineage(f));
    return records;
}

namespace {

// Growth segments of one record: [begin, end] row index ranges between
// divisions, including the leading and trailing partial segments.
std::vector<std::pair<std::size_t, std::size_t>> segments(const LineageRecord& rec) {
    std::vector<std::pair<std::size_t, std::size_t>> segs;
    std::size_t start = 0;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        if (rec.rows[i].division) {
            segs.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (start < rec.rows.size()) {
        segs.emplace_back(start, rec.rows.size() - 1);
    }
    return segs;
}

} // namespace

SlopeFit fit_slopes(const std::vector<LineageRecord>& records) {
    SlopeFit fit;
    for (const auto& rec : records) {
        for (const auto& [b, e] : segments(rec)) {
            if (e - b + 1 < 2) {
                ++fit.skipped_segments;
                continue;
            }
            std::vector<double> t, logs;
            t.reserve(e - b + 1);
            logs.reserve(e - b + 1);
            for (std::size_t i = b; i <= e; ++i) {
                t.push_back(rec.rows[i].time);
                logs.push_back(std::log(rec.rows[i].size));
            }
            fit.slopes.push_back(num::ols(t, logs).slope);
        }
    }
    if (fit.slopes.empty()) {
        throw EmptySample("fit_slopes: no segment has two or more points");
    }
    double sum = 0.0;
    for (double s : fit.slopes) sum += s;
    fit.theta_mean = sum / static_cast<double>(fit.slopes.size());
    return fit;
}

EmbeddedData extract_embedded(const std::vector<LineageRecord>& records) {
    EmbeddedData data;
    for (const auto& rec : records) {
        std::vector<std::size_t> flags;
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            if (rec.rows[i].division) flags.push_back(i);
        }
        std::vector<double> z_loc, zm_loc, t_loc;
        for (std::size_t f : flags) {
            if (f + 1 >= rec.rows.size()) {
                ++data.boundary_divisions_dropped;
                continue;
            }
            const double pre = std::log(rec.rows[f].size);
            const double post = std::log(rec.rows[f + 1].size);
            const double ratio = std::exp(post - pre);
            if (!(ratio > 0.0 && ratio < 1.0)) {
                std::ostringstream msg;
                msg << rec.lineage_id << ": division ratio " << ratio << " at t="
                    << rec.rows[f].time << " outside (0,1)";
                throw Error(msg.str());
            }
            z_loc.push_back(post);
            zm_loc.push_back(pre);
            t_loc.push_back(rec.rows[f].time);
            data.z.push_back(post);
            data.z_minus.push_back(pre);
            data.division_ratios.push_back(ratio);
        }
        for (std::size_t d = 1; d < t_loc.size(); ++d) {
            data.s.push_back(t_loc[d] - t_loc[d - 1]);
        }
        for (std::size_t d = 0; d + 1 < z_loc.size(); ++d) {
            data.pair_z.push_back(z_loc[d]);
            data.pair_s.push_back(t_loc[d + 1] - t_loc[d]);
            data.pair_z_minus.push_back(zm_loc[d + 1]);
            data.pair_z_post.push_back(z_loc[d + 1]);
        }
    }
    if (data.z.empty()) {
        throw NoDivisions("extract_embedded: no division events in the records");
    }
    const SlopeFit fit = fit_slopes(records);
    data.slopes = fit.slopes;
    data.theta_mean = fit.theta_mean;
    return data;
}

ChainData EmbeddedData::chain() const {
    if (pair_z.empty()) {
        throw EmptySample("EmbeddedData: no consecutive division pairs");
    }
    return ChainData(pair_z, pair_s, pair_z_minus, pair_z_post);
}

double EmbeddedData::mean_interjump() const {
    if (s.empty()) throw EmptySample("EmbeddedData: no inter-division times");
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum / static_cast<double>(s.size());
}

double EmbeddedData::ratio_mean() const {
    if (division_ratios.empty()) throw EmptySample("EmbeddedData: no ratios");
    double sum = 0.0;
    for (double v : division_ratios) sum += v;
    return sum / static_cast<double>(division_ratios.size());
}

double EmbeddedData::ratio_sd() const {
    const double m = ratio_mean();
    if (division_ratios.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : division_ratios) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(division_ratios.size() - 1));
}

EstimateCurve estimate_division_rate(const EmbeddedData& data, double theta,
                                     DivisionRateMethod method,
                                     const DivisionRateParams& params) {
    if (!(theta > 0.0)) throw ParameterOutOfRange("estimate_division_rate: theta must be positive");
    const ChainData chain = data.chain();
    const Kernel kernel = epanechnikov();
    const ModelSpec carrier = growth_model(theta, 0.5, 0.0); // supplies Delta == theta
    std::vector<double> grid = params.grid;
    if (grid.empty()) {
        // central data range; the extreme order statistics leave the quotient
        // with a handful of pairs and order-of-magnitude noise
        const double lo = num::quantile(data.z, 0.005);
        const double hi = num::quantile(data.z_minus, 0.995);
        grid = num::uniform_grid(lo, hi, params.grid_step);
    }

    EstimateCurve curve;
    curve.grid = grid;
    curve.n = chain.size();
    switch (method) {
        case DivisionRateMethod::ks: {
            curve = estimate_curve(EstimatorKind::ks, chain, grid,
                                   Bandwidths{params.h, 0, 0}, carrier, kernel);
            break;
        }
        case DivisionRateMethod::adaptive_ks: {
            curve = adaptive::adaptive_curve(EstimatorKind::adaptive_ks, chain, grid,
                                             carrier, params.projection)
                        .first;
            break;
        }
        case DivisionRateMethod::amg: {
            const double tau = data.mean_interjump();
            curve.kind = EstimatorKind::amg;
            curve.bandwidths = Bandwidths{0, params.hs, params.ht};
            for (double x : grid) {
                const double xi = x - theta * tau;
                const PointEstimate p =
                    lambda_circ_phi(chain, xi, tau, params.hs, params.ht, kernel);
                curve.values.push_back(p.value);
                curve.status.push_back(p.status);
            }
            break;
        }
    }
    return curve;
}

ValidationReport validate_posterior(const ModelSpec& fitted_model,
                                    const EstimateCurve& rate_curve,
                                    const std::vector<double>& raw_sizes,
                                    std::uint64_t seed, std::size_t n_jumps, double x0,
                                    std::size_t keep_last, double dt) {
    if (raw_sizes.empty()) throw EmptySample("validate_posterior: no raw sizes");
    std::vector<double> grid, values;
    for (std::size_t i = 0; i < rate_curve.grid.size(); ++i) {
        if (rate_curve.status[i] == EstimateStatus::ok) {
            grid.push_back(rate_curve.grid[i]);
            values.push_back(rate_curve.values[i]);
        }
    }
    if (grid.empty()) {
        throw EmptySample("validate_posterior: rate curve has no usable points");
    }
    const ModelSpec model = attach_rate(fitted_model, rate_from_curve(grid, values));
    const Trajectory traj = simulate_chain(model, x0, n_jumps, seed);
    const GridSamples samples = sample_grid(model, traj, dt);

    const std::size_t total = samples.values.size();
    const std::size_t keep = std::min(keep_last, total);
    std::vector<double> sim_sizes;
    sim_sizes.reserve(keep);
    for (std::size_t i = total - keep; i < total; ++i) {
        sim_sizes.push_back(std::exp(samples.values[i]));
    }

    ValidationReport report;
    report.simulated_positions = keep;
    report.ks_distance = num::ks_two_sample(sim_sizes, raw_sizes);

    // density overlays on a common size grid (Epanechnikov KDE with the
    // classic n^{-1/5} rate bandwidth)
    auto kde = [](const std::vector<double>& sample, const std::vector<double>& at) {
        std::vector<double> sorted = sample;
        std::sort(sorted.begin(), sorted.end());
        const double n = static_cast<double>(sorted.size());
        double mean = 0.0;
        for (double v : sorted) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : sorted) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
        const double h = std::max(1e-6, 1.06 * sd * std::pow(n, -0.2));
        const Kernel kernel = epanechnikov();
        std::vector<double> out;
        out.reserve(at.size());
        for (double x : at) out.push_back(kernel_mean_sorted(sorted, x, h, kernel));
        return out;
    };
    const double lo = std::min(*std::min_element(sim_sizes.begin(), sim_sizes.end()),
                               *std::min_element(raw_sizes.begin(), raw_sizes.end()));
    const double hi = std::max(*std::max_element(sim_sizes.begin(), sim_sizes.end()),
                               *std::max_element(raw_sizes.begin(), raw_sizes.end()));
    report.size_grid = num::uniform_grid(lo, hi, (hi - lo) / 200.0);
    report.simulated_density = kde(sim_sizes, report.size_grid);
    report.empirical_density = kde(raw_sizes, report.size_grid);
    return report;
}

void write_validation_csv(const ValidationReport& report,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "size,simulated_density,empirical_density\n";
    for (std::size_t i = 0; i < report.size_grid.size(); ++i) {
        out << csv::fmt17(report.size_grid[i]) << ','
            << csv::fmt17(report.simulated_density[i]) << ','
            << csv::fmt17(report.empirical_density[i]) << '\n';
    }
}

std::vector<double> pooled_sizes(const std::vector<LineageRecord>& records) {
    std::vector<double> sizes;
    for (const auto& rec : records) {
        for (const auto& row : rec.rows) sizes.push_back(row.size);
    }
    return sizes;
}

} // namespace pdmp::realdata
