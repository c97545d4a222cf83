#pragma once

#include "lrpopt/objectives.hpp"
#include "lrpopt/placement.hpp"
#include "lrpopt/random.hpp"
#include "lrpopt/repair.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace lrpopt {

/// Room, evaluation grid and every constraint and repair setting an
/// optimization run shares. Immutable once built.
struct Problem {
    RoomModel room;
    Grid grid;
    ObjectiveConfig objective;
    RepairConfig repair;

    Problem(RoomModel room_model, ObjectiveConfig objective_cfg, RepairConfig repair_cfg = {});
};

/// Pareto dominance for minimization: no worse in both, better in one.
bool dominates(const Objectives& a, const Objectives& b);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct PsoConfig {
    std::size_t swarm_size = 60;
    std::size_t iterations = 60;
    Range w{0.1, 0.5};
    Range c1{1.5, 2.0};
    Range c2{1.5, 2.0};
    double p_up = 0.05;
    double p_down = 0.05;
    std::size_t m_init_min = 27;
    std::size_t m_init_max = 32;
    std::size_t archive_capacity = 100;
    /// Per-coordinate speed cap in meters per iteration; 0 selects
    /// 2 * bounding-box diagonal / iterations.
    double v_max = 0.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

double effective_v_max(const PsoConfig& cfg, const RoomModel& room);

struct SwarmParticle {
    Placement placement;
    std::vector<Vec2> velocity;
    Placement pbest;
    Objectives pbest_objectives;
    /// Non-dominated set of every objective pair this particle has held as pbest.
    std::vector<Objectives> pbest_history;
    Objectives objectives;
    bool feasible = false;
};

struct ArchiveEntry {
    Placement placement;
    Objectives objectives;
    double crowding = std::numeric_limits<double>::infinity();
};

/// Bounded set of mutually non-dominated solutions. When full, the entry with
/// the smallest crowding distance is evicted.
class ParetoArchive {
public:
    explicit ParetoArchive(std::size_t capacity = 100);

    /// Returns true when the candidate was kept.
    bool insert(const Placement& placement, const Objectives& objectives);

    [[nodiscard]] const std::vector<ArchiveEntry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }

    [[nodiscard]] const ArchiveEntry& best_f1() const;
    [[nodiscard]] const ArchiveEntry& best_f2() const;

private:
    void update_crowding();

    std::size_t capacity_;
    std::vector<ArchiveEntry> entries_;
};

/// Crowding distance per point: sum over objectives of the normalized gap
/// between neighbours; extremes get infinity.
std::vector<double> crowding_distances(const std::vector<Objectives>& points);

/// Binary tournament on crowding distance.
const Placement& select_leader(const ParetoArchive& archive, Rng& rng);

struct VelocityCoefficients {
    double inertia = 0.0;    // W
    double cognitive = 0.0;  // C1 * r1
    double social = 0.0;     // C2 * r2
};

/// v <- W v + C1 r1 (pbest - x) + C2 r2 (leader - x), clamped to +-v_max.
std::vector<Vec2> apply_velocity_rule(const std::vector<Vec2>& velocity, const std::vector<Vec2>& position,
                                      const std::vector<Vec2>& aligned_pbest,
                                      const std::vector<Vec2>& aligned_leader, const VelocityCoefficients& k,
                                      double v_max);

/// Inertia plus attraction toward the aligned pbest and leader placements,
/// clamped per coordinate to +-v_max. W, C1, C2, r1 and r2 are drawn per call.
std::vector<Vec2> velocity_update(const SwarmParticle& p, const Placement& leader, const PsoConfig& cfg,
                                  double v_max, bool type_constrained, Rng& rng);

/// Adds the velocity and repairs; the repaired placement is the new position.
RepairResult position_update(const SwarmParticle& p, const Problem& problem, Rng& rng);

/// Appends a reflector at a random point of the margin region with a random
/// velocity, unless the particle already holds m_max reflectors.
SwarmParticle upmutate(SwarmParticle p, const RoomModel& room, int n_types, std::size_t m_max, double v_max,
                       Rng& rng);

/// Removes the reflector of the over-represented type nearest to the centroid
/// of the largest region where the most reflectors are visible, then repairs.
/// Reverts when repair fails.
SwarmParticle downmutate(SwarmParticle p, const Problem& problem, Rng& rng);

/// Centroid used by downmutate.
Vec2 max_visibility_centroid(const Grid& grid, const std::vector<VisibilityMask>& masks);

struct IterationStats {
    std::size_t iteration = 0;
    std::size_t archive_size = 0;
    double best_f1 = 0.0;
    double best_f2 = 0.0;
    std::size_t feasible_particles = 0;
    std::size_t min_feasible_m = 0;  // over the whole run so far, 0 if none
    std::size_t evaluations = 0;
};

class InitializationError : public Error {
public:
    using Error::Error;
};

class Optimizer {
public:
    Optimizer(const Problem& problem, PsoConfig cfg);

    /// Random feasible placements with M drawn from the initial range.
    void initialize();
    /// Explicit starting placements, one per particle.
    void initialize(std::vector<Placement> placements);

    void step();

    [[nodiscard]] const ParetoArchive& archive() const { return archive_; }
    [[nodiscard]] const std::vector<SwarmParticle>& particles() const { return particles_; }
    [[nodiscard]] const std::vector<IterationStats>& history() const { return history_; }
    [[nodiscard]] std::size_t iteration() const { return iteration_; }

private:
    void record_stats();
    void absorb(std::size_t j, const Evaluation& ev);

    Problem problem_;
    PsoConfig cfg_;
    double v_max_;
    ParetoArchive archive_;
    std::vector<SwarmParticle> particles_;
    std::vector<IterationStats> history_;
    std::size_t iteration_ = 0;
    std::size_t evaluations_ = 0;
    std::size_t min_feasible_m_ = 0;
};

using IterationCallback = std::function<void(const Optimizer&)>;

/// Full optimization: initialization, then cfg.iterations swarm updates. The
/// callback fires after initialization and after every iteration.
Optimizer run(const Problem& problem, const PsoConfig& cfg, const IterationCallback& on_iteration = {});

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace lrpopt
