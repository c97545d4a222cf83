#pragma once

#include "lrpopt/objectives.hpp"
#include "lrpopt/random.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace lrpopt {

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // (-pi, pi]

    [[nodiscard]] Vec2 xy() const { return {x, y}; }
};

/// Maps any angle into (-pi, pi].
double wrap_angle(double a);

struct PoseParticle {
    Pose pose;
    double weight = 0.0;
};

/// Detected (distance bin, type) pairs in the canonical fingerprint order.
using Measurement = Fingerprint;

struct OdometryInput {
    double distance = 0.0;
    double rotation = 0.0;
};

struct MotionNoise {
    double sigma_d = 0.02;
    double sigma_theta = 0.08726646259971647;  // 5 degrees
};

struct AmclConfig {
    std::size_t particles = 2000;
    MotionNoise motion;
    double sigma_r = 0.075;
    double empty_cell_weight = 1e-12;
    double unmatched_weight = 1e-3;
    double outside_weight_factor = 0.1;
    /// Resample when the effective sample size drops below this share of the count.
    double resample_threshold = 0.5;

    void validate() const;
};

/// Expected fingerprint of every grid element, or nothing where fewer than N
/// reflectors are visible.
class FingerprintDatabase {
public:
    FingerprintDatabase(const Placement& pl, const std::vector<VisibilityMask>& masks, const Grid& grid,
                        std::size_t n, double r_res);

    [[nodiscard]] const Grid& grid() const { return *grid_; }
    [[nodiscard]] double r_res() const { return r_res_; }
    [[nodiscard]] std::size_t fingerprint_size() const { return n_; }
    [[nodiscard]] const std::optional<Fingerprint>& at(std::size_t element) const { return entries_[element]; }

private:
    const Grid* grid_;
    double r_res_;
    std::size_t n_;
    std::vector<std::optional<Fingerprint>> entries_;
};

/// Uniform over the room and over heading, equal weights.
std::vector<PoseParticle> init_particles(const RoomModel& room, std::size_t n, Rng& rng);

/// Applies odometry with Gaussian noise. Particles that leave the room are put
/// back on the nearest wall point and their weight is scaled down.
void motion_update(std::vector<PoseParticle>& particles, const OdometryInput& odo, const MotionNoise& noise,
                   const RoomModel& room, double outside_weight_factor, Rng& rng);

/// Weight factor of a measured fingerprint against an expected one: matched
/// entries within each type contribute a Gaussian on the bin residual,
/// unmatched entries a fixed floor.
double fingerprint_likelihood(const Measurement& meas, const Fingerprint& expected, double r_res,
                              const AmclConfig& cfg);

/// Likelihood at the grid element nearest to the pose.
double measurement_likelihood(const Pose& pose, const Measurement& meas, const FingerprintDatabase& db,
                              const AmclConfig& cfg);

/// Normalizes in place; returns false (and resets to uniform) if the weights
/// sum to zero or are not finite.
bool normalize_weights(std::vector<PoseParticle>& particles);

double effective_sample_size(const std::vector<PoseParticle>& particles);

struct ResampleOutcome {
    bool resampled = false;
    bool reset = false;  // all weights were zero
};

/// Systematic resampling, applied only when the effective sample size is below
/// threshold * count.
ResampleOutcome resample(std::vector<PoseParticle>& particles, Rng& rng, double threshold = 0.5);

/// Unconditional systematic resampling; weights become uniform.
void systematic_resample(std::vector<PoseParticle>& particles, Rng& rng);

/// Weighted mean position and circular mean heading.
Pose estimate(const std::vector<PoseParticle>& particles);

struct ScenarioStep {
    OdometryInput odometry;
    Measurement measurement;
};

struct Scenario {
    Measurement initial;
    std::vector<ScenarioStep> steps;
};

/// Global initialization followed by the tracking loop. Returns the initial
/// estimate followed by one estimate per step.
std::vector<Pose> track(const Scenario& scenario, const RoomModel& room, const FingerprintDatabase& db,
                        const AmclConfig& cfg, Rng& rng);

}  // namespace lrpopt
