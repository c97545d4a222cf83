#include "lrpopt/placement.hpp"

#include <algorithm>

namespace lrpopt {

void Placement::reindex()
{
    for (std::size_t i = 0; i < lrps.size(); ++i) {
        lrps[i].index = i;
    }
}

std::size_t Placement::count_type(int label) const
{
    return static_cast<std::size_t>(
        std::count_if(lrps.begin(), lrps.end(), [label](const Lrp& l) { return l.type.label == label; }));
}

Placement Placement::from_xy(const std::vector<Vec2>& xy, int n_types, double z_l)
{
    const auto types = type_assignment(xy.size(), n_types);
    Placement pl;
    pl.lrps.reserve(xy.size());
    for (std::size_t i = 0; i < xy.size(); ++i) {
        pl.lrps.push_back({{xy[i].x, xy[i].y, z_l}, types[i], i});
    }
    return pl;
}

std::vector<LrpType> type_assignment(std::size_t m, int n_types)
{
    if (n_types != 1 && n_types != 2) {
        throw Error("number of reflector types must be 1 or 2");
    }
    std::vector<LrpType> types(m);
    if (n_types == 2) {
        for (std::size_t i = 0; i < m; ++i) {
            types[i].label = static_cast<int>(i % 2);
        }
    }
    return types;
}

LrpType type_to_add(const Placement& pl, int n_types)
{
    if (n_types == 1) {
        return {0};
    }
    return pl.count_type(0) > pl.count_type(1) ? LrpType{1} : LrpType{0};
}

LrpType type_to_remove(const Placement& pl, int n_types)
{
    if (n_types == 1) {
        return {0};
    }
    return pl.count_type(0) > pl.count_type(1) ? LrpType{0} : LrpType{1};
}

std::vector<VisibilityMask> compute_masks(const Placement& pl, const Grid& grid, const RoomModel& room)
{
    std::vector<VisibilityMask> masks;
    masks.reserve(pl.size());
    for (const auto& l : pl.lrps) {
        if (point_in_polygon(l.position.xy(), room.boundary) &&
            boundary_distance(l.position.xy(), room.boundary) > 0.0) {
            masks.push_back(visibility_mask(l.position, grid, room));
        } else {
            // A reflector on or outside a wall is not detectable anywhere.
            masks.push_back({std::vector<std::uint8_t>(grid.size(), 0)});
        }
    }
    return masks;
}

std::vector<int> visible_counts(const Grid& grid, const std::vector<VisibilityMask>& masks)
{
    std::vector<int> counts(grid.size(), 0);
    for (const auto& m : masks) {
        if (m.size() != grid.size()) {
            throw Error("visibility mask size does not match the grid");
        }
        for (std::size_t i = 0; i < counts.size(); ++i) {
            counts[i] += m.bits[i];
        }
    }
    return counts;
}

std::vector<std::pair<std::size_t, std::size_t>> spacing_violations(const Placement& pl, double d_min)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const double d2 = d_min * d_min;
    for (std::size_t i = 0; i < pl.size(); ++i) {
        for (std::size_t j = i + 1; j < pl.size(); ++j) {
            if ((pl[i].position.xy() - pl[j].position.xy()).squared_norm() < d2) {
                out.emplace_back(i, j);
            }
        }
    }
    return out;
}

ConstraintReport check_constraints(const Placement& pl, const RoomModel& room, const Grid& grid,
                                   const std::vector<VisibilityMask>& masks, const ConstraintLimits& limits)
{
    if (masks.size() != pl.size()) {
        throw Error("mask count does not match the placement size");
    }
    ConstraintReport report;
    report.m_ok = !pl.empty() && pl.size() <= limits.m_max;

    const auto counts = visible_counts(grid, masks);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (static_cast<std::size_t>(counts[i]) < limits.k_min) {
            report.coverage_violations.push_back(i);
        }
    }
    report.coverage_ok = report.coverage_violations.empty();

    report.spacing_violations = spacing_violations(pl, limits.d_min);
    report.spacing_ok = report.spacing_violations.empty();

    for (std::size_t i = 0; i < pl.size(); ++i) {
        if (!in_margin_region(pl[i].position.xy(), room)) {
            report.margin_violations.push_back(i);
        }
    }
    report.margin_ok = report.margin_violations.empty();

    report.feasible = report.m_ok && report.coverage_ok && report.spacing_ok && report.margin_ok;
    return report;
}

std::vector<VisibleLrp> visible_lrps(std::size_t element, const Placement& pl,
                                     const std::vector<VisibilityMask>& masks, const Grid& grid)
{
    if (masks.size() != pl.size()) {
        throw Error("mask count does not match the placement size");
    }
    const Vec3& p = grid.center(element);
    std::vector<VisibleLrp> out;
    for (std::size_t l = 0; l < pl.size(); ++l) {
        if (masks[l][element]) {
            out.push_back({l, distance(p, pl[l].position)});
        }
    }
    std::sort(out.begin(), out.end(), [&](const VisibleLrp& a, const VisibleLrp& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return pl[a.lrp].index < pl[b.lrp].index;
    });
    return out;
}

std::vector<VisibleLrp> visible_lrps(const Vec3& p_r, const Placement& pl,
                                     const std::vector<VisibilityMask>& masks, const Grid& grid)
{
    const auto idx = grid.find_center(p_r.xy());
    if (!idx) {
        throw Error("query point is not a grid element center");
    }
    return visible_lrps(*idx, pl, masks, grid);
}

}  // namespace lrpopt
