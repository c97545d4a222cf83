#include "lrpopt/repair.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace lrpopt {

Placement magnet_step(const Placement& pl, double d_min, double delta, Rng& rng)
{
    const std::size_t m = pl.size();
    std::vector<std::vector<Vec2>> pushes(m);
    const double target = d_min * (1.0 + delta);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const Vec2 diff = pl[i].position.xy() - pl[j].position.xy();
            const double d = diff.norm();
            if (d >= d_min) {
                continue;
            }
            Vec2 dir;
            if (d < 1e-12) {
                const double a = uniform(rng, -std::numbers::pi, std::numbers::pi);
                dir = {std::cos(a), std::sin(a)};
            } else {
                dir = (1.0 / d) * diff;
            }
            const double half = 0.5 * (target - d);
            pushes[i].push_back(half * dir);
            pushes[j].push_back(-half * dir);
        }
    }
    Placement out = pl;
    for (std::size_t i = 0; i < m; ++i) {
        // Summation order fixed by value so the result ignores list order.
        std::sort(pushes[i].begin(), pushes[i].end(),
                  [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
        Vec2 total;
        for (const auto& p : pushes[i]) {
            total += p;
        }
        out[i].position.x += total.x;
        out[i].position.y += total.y;
    }
    return out;
}

std::vector<Vec2> coverage_violation_centroids(const Grid& grid, const std::vector<VisibilityMask>& masks,
                                               std::size_t k_min)
{
    const auto counts = visible_counts(grid, masks);
    std::vector<Vec2> centroids;
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (seen[i] || static_cast<std::size_t>(counts[i]) >= k_min) {
            continue;
        }
        Vec2 acc;
        std::size_t n = 0;
        seen[i] = 1;
        stack.push_back(i);
        while (!stack.empty()) {
            const auto cur = stack.back();
            stack.pop_back();
            acc += grid.center(cur).xy();
            ++n;
            for (const auto nb : grid.neighbours4(cur)) {
                if (!seen[nb] && static_cast<std::size_t>(counts[nb]) < k_min) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        centroids.push_back((1.0 / static_cast<double>(n)) * acc);
    }
    return centroids;
}

Placement gravitation_step(const Placement& pl, const std::vector<Vec2>& centroids, double gamma, double step_cap)
{
    if (centroids.empty()) {
        throw Error("gravitation step needs at least one centroid");
    }
    Placement out = pl;
    for (auto& l : out.lrps) {
        const Vec2 p = l.position.xy();
        const Vec2* nearest = &centroids.front();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centroids) {
            const double d = (c - p).squared_norm();
            if (d < best) {
                best = d;
                nearest = &c;
            }
        }
        Vec2 move = gamma * (*nearest - p);
        const double len = move.norm();
        if (len > step_cap) {
            move = (step_cap / len) * move;
        }
        l.position.x += move.x;
        l.position.y += move.y;
    }
    return out;
}

namespace {

/// Recomputes only the masks of reflectors that moved since the last call.
class MaskCache {
public:
    MaskCache(const Grid& grid, const RoomModel& room) : grid_(grid), room_(room) {}

    const std::vector<VisibilityMask>& update(const Placement& pl)
    {
        if (positions_.size() != pl.size()) {
            positions_.clear();
            masks_.clear();
        }
        for (std::size_t i = 0; i < pl.size(); ++i) {
            const Vec2 p = pl[i].position.xy();
            if (i < positions_.size() && positions_[i] == p) {
                continue;
            }
            Placement single;
            single.lrps.push_back(pl[i]);
            auto mask = std::move(compute_masks(single, grid_, room_).front());
            if (i < positions_.size()) {
                positions_[i] = p;
                masks_[i] = std::move(mask);
            } else {
                positions_.push_back(p);
                masks_.push_back(std::move(mask));
            }
        }
        return masks_;
    }

private:
    const Grid& grid_;
    const RoomModel& room_;
    std::vector<Vec2> positions_;
    std::vector<VisibilityMask> masks_;
};

}  // namespace

RepairResult repair(Placement pl, const RoomModel& room, const Grid& grid, const ObjectiveConfig& cfg,
                    const RepairConfig& rcfg, Rng& rng)
{
    MaskCache cache(grid, room);
    const double d_min = cfg.limits.d_min;
    for (int iter = 0;; ++iter) {
        const auto& masks = cache.update(pl);
        const auto report = check_constraints(pl, room, grid, masks, cfg.limits);
        if (report.feasible || iter >= rcfg.max_iter) {
            return {std::move(pl), report.feasible, iter, masks};
        }
        if (!report.coverage_ok) {
            pl = gravitation_step(pl, coverage_violation_centroids(grid, masks, cfg.limits.k_min), rcfg.gamma,
                                  rcfg.step_cap);
        }
        if (!spacing_violations(pl, d_min).empty()) {
            pl = magnet_step(pl, d_min, rcfg.delta, rng);
        }
        for (auto& l : pl.lrps) {
            const Vec2 p = project_into_margin(l.position.xy(), room);
            l.position.x = p.x;
            l.position.y = p.y;
        }
    }
}

Vec2 sample_margin_region(const RoomModel& room, Rng& rng)
{
    const Vec2 lo = room.boundary.bbox_min();
    const Vec2 hi = room.boundary.bbox_max();
    for (int tries = 0; tries < 1'000'000; ++tries) {
        const Vec2 p{uniform(rng, lo.x, hi.x), uniform(rng, lo.y, hi.y)};
        if (in_margin_region(p, room)) {
            return p;
        }
    }
    throw Error("wall-margin region appears to be empty");
}

std::optional<Placement> random_feasible(const RoomModel& room, const Grid& grid, std::size_t m,
                                         const ObjectiveConfig& cfg, const RepairConfig& rcfg,
                                         std::uint64_t seed)
{
    if (m == 0) {
        throw Error("placement needs at least one reflector");
    }
    for (int attempt = 0; attempt < rcfg.restarts; ++attempt) {
        Rng rng = make_rng(seed, {static_cast<std::uint64_t>(attempt)});
        std::vector<Vec2> xy(m);
        for (auto& p : xy) {
            p = sample_margin_region(room, rng);
        }
        auto result = repair(Placement::from_xy(xy, cfg.n_types, room.z_l), room, grid, cfg, rcfg, rng);
        if (result.feasible) {
            return std::move(result.placement);
        }
    }
    return std::nullopt;
}

}  // namespace lrpopt
