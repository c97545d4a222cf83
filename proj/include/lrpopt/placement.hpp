#pragma once

#include "lrpopt/geom.hpp"

#include <compare>
#include <cstddef>
#include <utility>
#include <vector>

namespace lrpopt {

/// Reflector type label. At most two types can be told apart.
struct LrpType {
    int label = 0;

    friend auto operator<=>(LrpType, LrpType) = default;
};

struct Lrp {
    Vec3 position;
    LrpType type;
    std::size_t index = 0;
};

struct Placement {
    std::vector<Lrp> lrps;

    [[nodiscard]] std::size_t size() const { return lrps.size(); }
    [[nodiscard]] bool empty() const { return lrps.empty(); }
    [[nodiscard]] const Lrp& operator[](std::size_t i) const { return lrps[i]; }
    [[nodiscard]] Lrp& operator[](std::size_t i) { return lrps[i]; }

    /// Restores index == list position after insertions, removals or shuffles.
    void reindex();

    [[nodiscard]] std::size_t count_type(int label) const;

    /// Builds a placement at height z_l with types from type_assignment().
    static Placement from_xy(const std::vector<Vec2>& xy, int n_types, double z_l);
};

/// Equal split of types; for two types the even indices get type 0, so an odd
/// count has one more type 0 than type 1.
std::vector<LrpType> type_assignment(std::size_t m, int n_types);

/// Type that restores the equal split when one reflector is added.
LrpType type_to_add(const Placement& pl, int n_types);

/// Type whose removal keeps the equal split when one reflector is removed.
LrpType type_to_remove(const Placement& pl, int n_types);

struct ConstraintLimits {
    std::size_t m_max = 32;
    std::size_t k_min = 4;
    double d_min = 0.5;
};

struct ConstraintReport {
    bool m_ok = false;
    bool coverage_ok = false;
    std::vector<std::size_t> coverage_violations;
    bool spacing_ok = false;
    std::vector<std::pair<std::size_t, std::size_t>> spacing_violations;
    bool margin_ok = false;
    std::vector<std::size_t> margin_violations;
    bool feasible = false;
};

std::vector<VisibilityMask> compute_masks(const Placement& pl, const Grid& grid, const RoomModel& room);

/// Per-element count of reflectors whose mask bit is set.
std::vector<int> visible_counts(const Grid& grid, const std::vector<VisibilityMask>& masks);

std::vector<std::pair<std::size_t, std::size_t>> spacing_violations(const Placement& pl, double d_min);

ConstraintReport check_constraints(const Placement& pl, const RoomModel& room, const Grid& grid,
                                   const std::vector<VisibilityMask>& masks, const ConstraintLimits& limits);

struct VisibleLrp {
    std::size_t lrp = 0;  // position in the placement
    double distance = 0.0;
};

/// Reflectors visible from grid element `element`, nearest first, ties by index.
std::vector<VisibleLrp> visible_lrps(std::size_t element, const Placement& pl,
                                     const std::vector<VisibilityMask>& masks, const Grid& grid);

/// Same, addressed by the element center; throws if p_r is not a grid center.
std::vector<VisibleLrp> visible_lrps(const Vec3& p_r, const Placement& pl,
                                     const std::vector<VisibilityMask>& masks, const Grid& grid);

}  // namespace lrpopt
