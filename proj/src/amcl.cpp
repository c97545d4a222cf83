#include "lrpopt/amcl.hpp"

#include "lrpopt/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lrpopt {

double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    return a <= -std::numbers::pi ? a + two_pi : a;
}

void AmclConfig::validate() const
{
    if (particles == 0) throw Error("particle count must be positive");
    if (!(sigma_r > 0.0)) throw Error("measurement sigma must be positive");
    if (motion.sigma_d < 0.0 || motion.sigma_theta < 0.0) throw Error("motion noise must be non-negative");
    if (!(empty_cell_weight > 0.0 && unmatched_weight > 0.0)) throw Error("weight floors must be positive");
    if (!(outside_weight_factor >= 0.0 && outside_weight_factor <= 1.0)) {
        throw Error("outside weight factor must lie in [0, 1]");
    }
    if (!(resample_threshold >= 0.0 && resample_threshold <= 1.0)) {
        throw Error("resample threshold must lie in [0, 1]");
    }
}

FingerprintDatabase::FingerprintDatabase(const Placement& pl, const std::vector<VisibilityMask>& masks,
                                         const Grid& grid, std::size_t n, double r_res)
    : grid_(&grid), r_res_(r_res), n_(n), entries_(grid.size())
{
    const auto counts = visible_counts(grid, masks);
    for (std::size_t e = 0; e < grid.size(); ++e) {
        if (static_cast<std::size_t>(counts[e]) >= n) {
            entries_[e] = fingerprint(e, pl, masks, grid, n, r_res);
        }
    }
}

std::vector<PoseParticle> init_particles(const RoomModel& room, std::size_t n, Rng& rng)
{
    if (n == 0) {
        throw Error("particle count must be positive");
    }
    const Vec2 lo = room.boundary.bbox_min();
    const Vec2 hi = room.boundary.bbox_max();
    std::vector<PoseParticle> out(n);
    for (auto& p : out) {
        Vec2 xy;
        do {
            xy = {uniform(rng, lo.x, hi.x), uniform(rng, lo.y, hi.y)};
        } while (!point_in_polygon(xy, room.boundary));
        p.pose = {xy.x, xy.y, wrap_angle(uniform(rng, -std::numbers::pi, std::numbers::pi))};
        p.weight = 1.0 / static_cast<double>(n);
    }
    return out;
}

void motion_update(std::vector<PoseParticle>& particles, const OdometryInput& odo, const MotionNoise& noise,
                   const RoomModel& room, double outside_weight_factor, Rng& rng)
{
    for (auto& p : particles) {
        const double heading = wrap_angle(p.pose.heading + odo.rotation + gaussian(rng, noise.sigma_theta));
        const double d = odo.distance + gaussian(rng, noise.sigma_d);
        Vec2 xy{p.pose.x + d * std::cos(heading), p.pose.y + d * std::sin(heading)};
        if (!point_in_polygon(xy, room.boundary)) {
            xy = nearest_boundary_point(xy, room.boundary).point;
            p.weight *= outside_weight_factor;
        }
        p.pose = {xy.x, xy.y, heading};
    }
}

double fingerprint_likelihood(const Measurement& meas, const Fingerprint& expected, double r_res,
                              const AmclConfig& cfg)
{
    const double inv_two_var = 1.0 / (2.0 * cfg.sigma_r * cfg.sigma_r);
    double weight = 1.0;
    for (const int label : {0, 1}) {
        std::vector<std::int64_t> a;
        std::vector<std::int64_t> b;
        for (const auto& e : meas.entries) {
            if (e.type.label == label) a.push_back(e.bin);
        }
        for (const auto& e : expected.entries) {
            if (e.type.label == label) b.push_back(e.bin);
        }
        const std::size_t unmatched = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
        weight *= std::pow(cfg.unmatched_weight, static_cast<double>(unmatched));
        if (a.empty() || b.empty()) {
            continue;
        }
        if (a.size() > b.size()) {
            std::swap(a, b);
        }
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    static_cast<double>(std::llabs(a[i] - b[j]));
            }
        }
        const auto match = hungarian(cost);
        double exponent = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double r = static_cast<double>(a[i] - b[match[i]]) * r_res;
            exponent += r * r;
        }
        weight *= std::exp(-exponent * inv_two_var);
    }
    return weight;
}

double measurement_likelihood(const Pose& pose, const Measurement& meas, const FingerprintDatabase& db,
                              const AmclConfig& cfg)
{
    const auto& expected = db.at(db.grid().nearest(pose.xy()));
    if (!expected) {
        return cfg.empty_cell_weight;
    }
    return std::max(fingerprint_likelihood(meas, *expected, db.r_res(), cfg), cfg.empty_cell_weight);
}

bool normalize_weights(std::vector<PoseParticle>& particles)
{
    double sum = 0.0;
    for (const auto& p : particles) {
        sum += p.weight;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        const double w = 1.0 / static_cast<double>(particles.size());
        for (auto& p : particles) {
            p.weight = w;
        }
        return false;
    }
    for (auto& p : particles) {
        p.weight /= sum;
    }
    return true;
}

double effective_sample_size(const std::vector<PoseParticle>& particles)
{
    double sq = 0.0;
    for (const auto& p : particles) {
        sq += p.weight * p.weight;
    }
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

void systematic_resample(std::vector<PoseParticle>& particles, Rng& rng)
{
    const std::size_t n = particles.size();
    if (n == 0) {
        return;
    }
    const double step = 1.0 / static_cast<double>(n);
    const double start = uniform(rng, 0.0, step);
    std::vector<PoseParticle> out;
    out.reserve(n);
    double cumulative = particles[0].weight;
    std::size_t i = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = start + static_cast<double>(k) * step;
        while (target > cumulative && i + 1 < n) {
            cumulative += particles[++i].weight;
        }
        out.push_back({particles[i].pose, step});
    }
    particles = std::move(out);
}

ResampleOutcome resample(std::vector<PoseParticle>& particles, Rng& rng, double threshold)
{
    ResampleOutcome outcome;
    if (particles.empty()) {
        return outcome;
    }
    double sum = 0.0;
    for (const auto& p : particles) {
        sum += p.weight;
    }
    if (!(sum > 0.0)) {
        normalize_weights(particles);
        outcome.reset = true;
        return outcome;
    }
    if (effective_sample_size(particles) < threshold * static_cast<double>(particles.size())) {
        systematic_resample(particles, rng);
        outcome.resampled = true;
    }
    return outcome;
}

Pose estimate(const std::vector<PoseParticle>& particles)
{
    if (particles.empty()) {
        throw Error("cannot estimate a pose from no particles");
    }
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
    double c = 0.0;
    for (const auto& p : particles) {
        x += p.weight * p.pose.x;
        y += p.weight * p.pose.y;
        s += p.weight * std::sin(p.pose.heading);
        c += p.weight * std::cos(p.pose.heading);
    }
    return {x, y, wrap_angle(std::atan2(s, c))};
}

namespace {

void weight_update(std::vector<PoseParticle>& particles, const Measurement& meas, const FingerprintDatabase& db,
                   const AmclConfig& cfg, std::vector<double>& cache)
{
    // Particles in the same element share a likelihood.
    std::fill(cache.begin(), cache.end(), -1.0);
    for (auto& p : particles) {
        const std::size_t e = db.grid().nearest(p.pose.xy());
        if (cache[e] < 0.0) {
            const auto& expected = db.at(e);
            cache[e] = expected ? std::max(fingerprint_likelihood(meas, *expected, db.r_res(), cfg),
                                           cfg.empty_cell_weight)
                                : cfg.empty_cell_weight;
        }
        p.weight *= cache[e];
    }
    normalize_weights(particles);
}

}  // namespace

std::vector<Pose> track(const Scenario& scenario, const RoomModel& room, const FingerprintDatabase& db,
                        const AmclConfig& cfg, Rng& rng)
{
    cfg.validate();
    std::vector<double> cache(db.grid().size());
    auto particles = init_particles(room, cfg.particles, rng);
    weight_update(particles, scenario.initial, db, cfg, cache);

    std::vector<Pose> estimates;
    estimates.reserve(scenario.steps.size() + 1);
    estimates.push_back(estimate(particles));
    for (const auto& step : scenario.steps) {
        resample(particles, rng, cfg.resample_threshold);
        motion_update(particles, step.odometry, cfg.motion, room, cfg.outside_weight_factor, rng);
        weight_update(particles, step.measurement, db, cfg, cache);
        estimates.push_back(estimate(particles));
    }
    return estimates;
}

}  // namespace lrpopt
