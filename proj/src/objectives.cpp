#include "lrpopt/objectives.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace lrpopt {

std::size_t FingerprintHash::operator()(const Fingerprint& f) const noexcept
{
    std::size_t h = 0xcbf29ce484222325ull;
    for (const auto& e : f.entries) {
        const auto v = static_cast<std::uint64_t>(e.bin) * 2u + static_cast<std::uint64_t>(e.type.label);
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

std::int64_t distance_bin(double distance, double r_res)
{
    return static_cast<std::int64_t>(std::round(distance / r_res));
}

Fingerprint make_fingerprint(std::vector<FingerprintEntry> entries)
{
    std::sort(entries.begin(), entries.end());
    return Fingerprint{std::move(entries)};
}

Fingerprint fingerprint(std::size_t element, const Placement& pl, const std::vector<VisibilityMask>& masks,
                        const Grid& grid, std::size_t n, double r_res)
{
    const auto visible = visible_lrps(element, pl, masks, grid);
    if (visible.size() < n) {
        throw Error("fewer than N reflectors visible at grid element " + std::to_string(element));
    }
    std::vector<FingerprintEntry> entries;
    entries.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        entries.push_back({distance_bin(visible[k].distance, r_res), pl[visible[k].lrp].type});
    }
    return make_fingerprint(std::move(entries));
}

namespace {

struct Grouping {
    std::vector<std::size_t> group;
    std::vector<std::size_t> group_size;
};

Grouping group_fingerprints(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                            std::size_t n, double r_res)
{
    Grouping g;
    g.group.resize(grid.size());
    std::unordered_map<Fingerprint, std::size_t, FingerprintHash> ids;
    ids.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto [it, inserted] = ids.try_emplace(fingerprint(i, pl, masks, grid, n, r_res), g.group_size.size());
        if (inserted) {
            g.group_size.push_back(0);
        }
        g.group[i] = it->second;
        ++g.group_size[it->second];
    }
    return g;
}

}  // namespace

std::size_t ambiguity_count(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                            std::size_t n, double r_res)
{
    const auto g = group_fingerprints(pl, grid, masks, n, r_res);
    std::size_t f1 = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (g.group_size[g.group[i]] >= 2) {
            ++f1;
        }
    }
    return f1;
}

AmbiguityResult ambiguity(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                          std::size_t n, double r_res)
{
    const auto g = group_fingerprints(pl, grid, masks, n, r_res);
    AmbiguityResult result;
    auto& map = result.map;
    map.group = g.group;
    map.classes.assign(grid.size(), AmbiguityClass::unique);

    // Count 4-connected regions per group with one flood fill over the grid.
    std::vector<std::size_t> regions(g.group_size.size(), 0);
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (seen[i] || g.group_size[g.group[i]] < 2) {
            continue;
        }
        ++regions[g.group[i]];
        seen[i] = 1;
        stack.push_back(i);
        while (!stack.empty()) {
            const auto cur = stack.back();
            stack.pop_back();
            for (const auto nb : grid.neighbours4(cur)) {
                if (!seen[nb] && g.group[nb] == g.group[i]) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto grp = g.group[i];
        if (g.group_size[grp] < 2) {
            ++map.unique_count;
        } else if (regions[grp] == 1) {
            map.classes[i] = AmbiguityClass::local;
            ++map.local_count;
        } else {
            map.classes[i] = AmbiguityClass::global;
            ++map.global_count;
        }
    }
    result.f1 = map.local_count + map.global_count;
    return result;
}

double gdop_penalty(double sigma_r, bool use_sqrt)
{
    return use_sqrt ? std::sqrt(kGdopPenaltyFactor) * sigma_r : kGdopPenaltyFactor * sigma_r * sigma_r;
}

double gdop(const Vec3& p_r, const std::vector<Vec3>& visible, double sigma_r, bool use_sqrt)
{
    if (visible.size() < 4) {
        throw Error("GDOP needs at least 4 visible reflectors");
    }
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (const auto& q : visible) {
        Eigen::Vector3d h(p_r.x - q.x, p_r.y - q.y, p_r.z - q.z);
        const double len = h.norm();
        if (len == 0.0) {
            return gdop_penalty(sigma_r, use_sqrt);
        }
        h /= len;
        info.noalias() += h * h.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    if (!(lambda(0) > 0.0) || lambda(2) / lambda(0) > kMaxConditionNumber) {
        return gdop_penalty(sigma_r, use_sqrt);
    }
    const double trace_inv = 1.0 / lambda(0) + 1.0 / lambda(1) + 1.0 / lambda(2);
    return use_sqrt ? std::sqrt(trace_inv) * sigma_r : trace_inv * sigma_r * sigma_r;
}

double gdop(const Vec3& p_r, const Placement& pl, const std::vector<VisibleLrp>& visible, double sigma_r,
            bool use_sqrt)
{
    std::vector<Vec3> pts;
    pts.reserve(visible.size());
    for (const auto& v : visible) {
        pts.push_back(pl[v.lrp].position);
    }
    return gdop(p_r, pts, sigma_r, use_sqrt);
}

GdopResult gdop_objective(const Placement& pl, const Grid& grid, const std::vector<VisibilityMask>& masks,
                          double sigma_r, bool use_sqrt)
{
    GdopResult result;
    result.map.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto visible = visible_lrps(i, pl, masks, grid);
        result.map[i] = gdop(grid.center(i), pl, visible, sigma_r, use_sqrt);
        result.f2 += result.map[i];
    }
    return result;
}

Objectives penalty_objectives(const Grid& grid, const ObjectiveConfig& cfg)
{
    const auto n = static_cast<double>(grid.size());
    return {10.0 * n, gdop_penalty(cfg.sigma_r, cfg.gdop_sqrt) * n};
}

Evaluation evaluate(const Placement& pl, const RoomModel& room, const Grid& grid,
                    const std::vector<VisibilityMask>& masks, const ObjectiveConfig& cfg)
{
    const auto report = check_constraints(pl, room, grid, masks, cfg.limits);
    if (!report.feasible || pl.size() < cfg.fingerprint_size) {
        return {penalty_objectives(grid, cfg), false};
    }
    try {
        const auto f1 = ambiguity_count(pl, grid, masks, cfg.fingerprint_size, room.r_res);
        const auto f2 = gdop_objective(pl, grid, masks, cfg.sigma_r, cfg.gdop_sqrt).f2;
        return {{static_cast<double>(f1), f2}, true};
    } catch (const Error&) {
        // Coverage limit below the fingerprint or GDOP requirement.
        return {penalty_objectives(grid, cfg), false};
    }
}

Evaluation evaluate(const Placement& pl, const RoomModel& room, const Grid& grid, const ObjectiveConfig& cfg)
{
    return evaluate(pl, room, grid, compute_masks(pl, grid, room), cfg);
}

}  // namespace lrpopt
