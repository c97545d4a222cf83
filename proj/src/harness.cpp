#include "lrpopt/harness.hpp"

#include "lrpopt/mopso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrpopt {

namespace {

bool segment_inside(Vec2 a, Vec2 b, const Polygon& poly)
{
    if (!point_in_polygon(a, poly) || !point_in_polygon(b, poly)) {
        return false;
    }
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 c = poly[i];
        const Vec2 d = poly.next(i);
        // A proper crossing leaves the room; touching a wall does not.
        const double d1 = cross(b - a, c - a);
        const double d2 = cross(b - a, d - a);
        const double d3 = cross(d - c, a - c);
        const double d4 = cross(d - c, b - c);
        if (((d1 > 1e-12 && d2 < -1e-12) || (d1 < -1e-12 && d2 > 1e-12)) &&
            ((d3 > 1e-12 && d4 < -1e-12) || (d3 < -1e-12 && d4 > 1e-12))) {
            return false;
        }
    }
    // Catches passing through a reflex vertex to the outside.
    const double len = distance(a, b);
    const auto samples = static_cast<int>(std::ceil(len / 0.01));
    for (int k = 1; k < samples; ++k) {
        const double t = static_cast<double>(k) / samples;
        if (!point_in_polygon(a + t * (b - a), poly)) {
            return false;
        }
    }
    return true;
}

}  // namespace

Path gen_path(const std::vector<Vec2>& waypoints, double step, const RoomModel& room)
{
    if (waypoints.empty()) {
        throw Error("path needs at least one waypoint");
    }
    if (!(step > 0.0)) {
        throw Error("path step must be positive");
    }
    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
        if (!segment_inside(waypoints[k], waypoints[k + 1], room.boundary)) {
            throw Error("path segment " + std::to_string(k) + " leaves the room");
        }
    }
    if (!point_in_polygon(waypoints.front(), room.boundary)) {
        throw Error("path start lies outside the room");
    }

    Path path;
    double heading = 0.0;
    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
        const Vec2 d = waypoints[k + 1] - waypoints[k];
        if (d.norm() > 0.0) {
            heading = std::atan2(d.y, d.x);
            break;
        }
    }
    path.start = {waypoints.front().x, waypoints.front().y, wrap_angle(heading)};

    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
        const Vec2 a = waypoints[k];
        const Vec2 b = waypoints[k + 1];
        const double len = distance(a, b);
        if (len <= 0.0) {
            continue;
        }
        const double seg_heading = std::atan2(b.y - a.y, b.x - a.x);
        double turn = wrap_angle(seg_heading - heading);
        heading = seg_heading;
        const auto n = static_cast<std::size_t>(std::ceil(len / step - 1e-9));
        for (std::size_t s = 1; s <= n; ++s) {
            const double travelled = s == n ? len : static_cast<double>(s) * step;
            const double moved = s == n ? len - static_cast<double>(n - 1) * step : step;
            const Vec2 p = s == n ? b : a + (travelled / len) * (b - a);
            path.steps.push_back({{p.x, p.y, wrap_angle(heading)}, {moved, turn}});
            turn = 0.0;
        }
    }
    return path;
}

Measurement simulate_measurement(const Pose& truth, const Placement& pl, const std::vector<VisibilityMask>& masks,
                                 const Grid& grid, std::size_t n, double r_res, double sigma, Rng& rng)
{
    const auto visible = visible_lrps(grid.nearest(truth.xy()), pl, masks, grid);
    if (visible.size() < n) {
        throw Error("fewer reflectors visible at the measurement position than the fingerprint size");
    }
    struct Noisy {
        double distance;
        std::size_t lrp;
    };
    std::vector<Noisy> noisy;
    noisy.reserve(visible.size());
    for (const auto& v : visible) {
        noisy.push_back({v.distance + gaussian(rng, sigma), v.lrp});
    }
    std::stable_sort(noisy.begin(), noisy.end(), [](const Noisy& a, const Noisy& b) { return a.distance < b.distance; });
    std::vector<FingerprintEntry> entries;
    entries.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        entries.push_back({distance_bin(noisy[k].distance, r_res), pl[noisy[k].lrp].type});
    }
    return make_fingerprint(std::move(entries));
}

OdometryInput simulate_odometry(const OdometryInput& truth, const MotionNoise& noise, Rng& rng)
{
    const double d = truth.distance + gaussian(rng, noise.sigma_d);
    const double r = truth.rotation + gaussian(rng, noise.sigma_theta);
    return {d, r};
}

double rmse(const std::vector<Pose>& truth, const std::vector<Pose>& estimates)
{
    if (truth.size() != estimates.size()) {
        throw Error("truth and estimate sequences differ in length");
    }
    if (truth.empty()) {
        throw Error("RMSE of an empty sequence");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sum += (truth[i].xy() - estimates[i].xy()).squared_norm();
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

double percentile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw Error("percentile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ExperimentReport run_experiment(const RoomModel& room, const Grid& grid, const Placement& pl,
                                std::size_t fingerprint_size, const ExperimentConfig& cfg)
{
    if (cfg.seeds.empty()) {
        throw Error("experiment needs at least one seed");
    }
    if (cfg.histogram_bins == 0 || !(cfg.histogram_bin > 0.0)) {
        throw Error("histogram needs a positive bin count and width");
    }
    cfg.amcl.validate();
    const auto masks = compute_masks(pl, grid, room);
    const FingerprintDatabase db(pl, masks, grid, fingerprint_size, room.r_res);
    const Path path = gen_path(cfg.waypoints, cfg.step, room);
    const double sigma = cfg.measurement_sigma < 0.0 ? room.r_res : cfg.measurement_sigma;

    std::vector<Pose> truth{path.start};
    for (const auto& s : path.steps) {
        truth.push_back(s.truth);
    }

    ExperimentReport report;
    report.steps = path.steps.size();
    report.runs.resize(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t r) {
        const std::uint64_t seed = cfg.seeds[r];
        Rng meas_rng = make_rng(seed, {1});
        Rng odo_rng = make_rng(seed, {2});
        Rng filter_rng = make_rng(seed, {3});

        Scenario scenario;
        scenario.initial = simulate_measurement(path.start, pl, masks, grid, fingerprint_size, room.r_res, sigma,
                                                meas_rng);
        scenario.steps.reserve(path.steps.size());
        for (const auto& s : path.steps) {
            const auto odo = simulate_odometry(s.odometry, cfg.odometry_noise, odo_rng);
            scenario.steps.push_back(
                {odo, simulate_measurement(s.truth, pl, masks, grid, fingerprint_size, room.r_res, sigma, meas_rng)});
        }
        const auto estimates = track(scenario, room, db, cfg.amcl, filter_rng);

        SeedResult& out = report.runs[r];
        out.seed = seed;
        out.rmse = rmse(truth, estimates);
        out.histogram.assign(cfg.histogram_bins, 0);
        double tail = 0.0;
        std::size_t tail_n = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const double err = distance(truth[i].xy(), estimates[i].xy());
            out.trace.push_back({truth[i], estimates[i], err});
            if (i > cfg.burn_in) {
                tail += err * err;
                ++tail_n;
                const auto bin = std::min(static_cast<std::size_t>(err / cfg.histogram_bin), cfg.histogram_bins - 1);
                ++out.histogram[bin];
            }
        }
        out.rmse_after_burn_in = tail_n > 0 ? std::sqrt(tail / static_cast<double>(tail_n)) : out.rmse;
    });

    report.histogram.assign(cfg.histogram_bins, 0);
    std::vector<double> all;
    std::vector<double> tail;
    for (const auto& run : report.runs) {
        all.push_back(run.rmse);
        tail.push_back(run.rmse_after_burn_in);
        for (std::size_t b = 0; b < cfg.histogram_bins; ++b) {
            report.histogram[b] += run.histogram[b];
        }
    }
    report.median_rmse = percentile(all, 0.5);
    report.median_rmse_after_burn_in = percentile(tail, 0.5);
    report.p10_rmse_after_burn_in = percentile(tail, 0.1);
    report.p90_rmse_after_burn_in = percentile(tail, 0.9);
    return report;
}

}  // namespace lrpopt
