#pragma once

#include "lrpopt/objectives.hpp"
#include "lrpopt/placement.hpp"
#include "lrpopt/random.hpp"

#include <optional>
#include <vector>

namespace lrpopt {

struct RepairConfig {
    double gamma = 0.2;      // gravitation step as a fraction of the distance
    double step_cap = 1.0;   // meters per gravitation step
    double delta = 0.05;     // magnet push overshoot above d_min
    int max_iter = 200;
    int restarts = 10;
};

/// Pushes every pair closer than d_min apart along its connecting line so the
/// pair ends up d_min * (1 + delta) apart. Moves are accumulated and applied
/// together; coincident pairs split along a random direction.
Placement magnet_step(const Placement& pl, double d_min, double delta, Rng& rng);

/// Mean position of each 4-connected region whose visible count is below k_min.
std::vector<Vec2> coverage_violation_centroids(const Grid& grid, const std::vector<VisibilityMask>& masks,
                                               std::size_t k_min);

/// Pulls every reflector toward its nearest centroid by gamma times the
/// distance, capped at step_cap.
Placement gravitation_step(const Placement& pl, const std::vector<Vec2>& centroids, double gamma,
                           double step_cap = 1.0);

struct RepairResult {
    Placement placement;
    bool feasible = false;
    int iterations = 0;
    std::vector<VisibilityMask> masks;  // of the returned placement
};

/// Iterates gravitation, magnet and margin projection until the placement
/// satisfies every constraint or max_iter is reached.
RepairResult repair(Placement pl, const RoomModel& room, const Grid& grid, const ObjectiveConfig& cfg,
                    const RepairConfig& rcfg, Rng& rng);

/// Uniform sample of the wall-margin region by rejection from the bounding box.
Vec2 sample_margin_region(const RoomModel& room, Rng& rng);

/// Uniform random reflectors in the margin region, then repaired; retried with
/// fresh positions up to rcfg.restarts times.
std::optional<Placement> random_feasible(const RoomModel& room, const Grid& grid, std::size_t m,
                                         const ObjectiveConfig& cfg, const RepairConfig& rcfg,
                                         std::uint64_t seed);

}  // namespace lrpopt
