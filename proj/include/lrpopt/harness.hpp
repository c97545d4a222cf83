#pragma once

#include "lrpopt/amcl.hpp"

#include <cstdint>
#include <vector>

namespace lrpopt {

struct PathStep {
    Pose truth;
    OdometryInput odometry;  // noiseless motion leading to truth
};

struct Path {
    Pose start;
    std::vector<PathStep> steps;
};

/// Piecewise-linear path through the waypoints sampled every `step` meters;
/// each segment ends on its waypoint with a shorter last step if needed. The
/// heading change at a waypoint is carried by the first step of the next
/// segment. Throws if any segment leaves the room.
Path gen_path(const std::vector<Vec2>& waypoints, double step, const RoomModel& room);

/// Noisy fingerprint at the grid element nearest to the truth: Gaussian noise
/// on every visible distance, the N smallest noisy distances kept and binned.
Measurement simulate_measurement(const Pose& truth, const Placement& pl, const std::vector<VisibilityMask>& masks,
                                 const Grid& grid, std::size_t n, double r_res, double sigma, Rng& rng);

OdometryInput simulate_odometry(const OdometryInput& truth, const MotionNoise& noise, Rng& rng);

double rmse(const std::vector<Pose>& truth, const std::vector<Pose>& estimates);

struct ExperimentConfig {
    std::vector<Vec2> waypoints;
    double step = 0.2;
    /// Measurement noise; negative selects r_res.
    double measurement_sigma = -1.0;
    MotionNoise odometry_noise;
    AmclConfig amcl;
    std::size_t burn_in = 20;
    double histogram_bin = 0.05;
    std::size_t histogram_bins = 20;  // the last bin collects everything beyond
    std::vector<std::uint64_t> seeds{1};
    unsigned threads = 1;
};

struct TraceRow {
    Pose truth;
    Pose estimate;
    double error = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    double rmse = 0.0;
    double rmse_after_burn_in = 0.0;
    std::vector<TraceRow> trace;
    std::vector<std::size_t> histogram;
};

struct ExperimentReport {
    std::vector<SeedResult> runs;
    std::vector<std::size_t> histogram;  // all seeds, after burn-in
    double median_rmse = 0.0;
    double median_rmse_after_burn_in = 0.0;
    double p10_rmse_after_burn_in = 0.0;
    double p90_rmse_after_burn_in = 0.0;
    std::size_t steps = 0;
};

/// Linear-interpolated percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Tracks the same path once per seed. Measurement noise, odometry noise and
/// the filter draw from separate streams of each seed, so two placements run
/// on the same seeds see identical odometry noise.
ExperimentReport run_experiment(const RoomModel& room, const Grid& grid, const Placement& pl,
                                std::size_t fingerprint_size, const ExperimentConfig& cfg);

}  // namespace lrpopt
