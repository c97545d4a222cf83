#pragma once

#include "lrpopt/placement.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lrpopt {

struct FingerprintEntry {
    std::int64_t bin = 0;
    LrpType type;

    friend auto operator<=>(const FingerprintEntry&, const FingerprintEntry&) = default;
};

/// N (distance bin, type) pairs in canonical ascending order.
struct Fingerprint {
    std::vector<FingerprintEntry> entries;

    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
    friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintHash {
    std::size_t operator()(const Fingerprint& f) const noexcept;
};

/// Distance bin by rounding half away from zero.
std::int64_t distance_bin(double distance, double r_res);

Fingerprint make_fingerprint(std::vector<FingerprintEntry> entries);

/// Fingerprint of grid element `element`: the N nearest visible reflectors by
/// true distance, binned with r_res. Throws if fewer than N are visible.
Fingerprint fingerprint(std::size_t element, const Placement& pl, const std::vector<VisibilityMask>& masks,
                        const Grid& grid, std::size_t n, double r_res);

struct ObjectiveConfig {
    int n_types = 1;
    std::size_t fingerprint_size = 4;
    ConstraintLimits limits;
    double sigma_r = 0.075;
    /// Report sqrt(tr((H^T H)^-1)) * sigma_r instead of the trace form.
    bool gdop_sqrt = false;
};

enum class AmbiguityClass : std::uint8_t { unique = 0, local = 1, global = 2 };

struct AmbiguityMap {
    std::vector<AmbiguityClass> classes;
    std::vector<std::size_t> group;  // shared by elements with equal fingerprints
    std::size_t unique_count = 0;
    std::size_t local_count = 0;
    std::size_t global_count = 0;
};

struct AmbiguityResult {
    std::size_t f1 = 0;
    AmbiguityMap map;
};

/// Groups elements by fingerprint; f1 counts elements in groups of size >= 2.
/// Ambiguous groups are local when 4-connected as one region, else global.
AmbiguityResult ambiguity(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                          std::size_t n, double r_res);

/// f1 only, without the connectivity analysis.
std::size_t ambiguity_count(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                            std::size_t n, double r_res);

/// Penalty for a singular or ill-conditioned information matrix, per sigma_r^2.
inline constexpr double kGdopPenaltyFactor = 1e6;
inline constexpr double kMaxConditionNumber = 1e12;

/// tr((H^T H)^-1) * sigma_r^2 with H the unit vectors from each visible
/// reflector to p_r. Needs at least 4 reflectors.
double gdop(const Vec3& p_r, const std::vector<Vec3>& visible, double sigma_r, bool use_sqrt = false);
double gdop(const Vec3& p_r, const Placement& pl, const std::vector<VisibleLrp>& visible, double sigma_r,
            bool use_sqrt = false);

/// GDOP value that gdop() returns for degenerate geometry.
double gdop_penalty(double sigma_r, bool use_sqrt = false);

struct GdopResult {
    double f2 = 0.0;
    std::vector<double> map;
};

GdopResult gdop_objective(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                          double sigma_r, bool use_sqrt = false);

struct Objectives {
    double f1 = 0.0;
    double f2 = 0.0;

    friend bool operator==(const Objectives&, const Objectives&) = default;
};

struct Evaluation {
    Objectives objectives;
    bool feasible = false;
};

Objectives penalty_objectives(const Grid& grid, const ObjectiveConfig& cfg);

/// Constraint check followed by (f1, f2), or the penalty pair when infeasible.
Evaluation evaluate(const Placement& pl, const RoomModel& room, const Grid& grid,
                    const std::vector<VisibilityMask>& masks, const ObjectiveConfig& cfg);
Evaluation evaluate(const Placement& pl, const RoomModel& room, const Grid& grid, const ObjectiveConfig& cfg);

}  // namespace lrpopt
