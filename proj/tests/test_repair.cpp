#include "fixtures.hpp"
#include "oracles.hpp"

#include "lrpopt/repair.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lrpopt;

namespace {

Vec2 centroid(const Placement& pl)
{
    Vec2 c;
    for (const auto& l : pl.lrps) c += l.position.xy();
    return (1.0 / static_cast<double>(pl.size())) * c;
}

}  // namespace

TEST_CASE("magnet step")
{
    Rng rng = make_rng(1);
    SUBCASE("symmetric push of a close pair")
    {
        const auto pl = Placement::from_xy({{1.0, 1.0}, {1.3, 1.0}}, 1, 3.0);
        const auto out = magnet_step(pl, 0.5, 0.05, rng);
        CHECK(distance(out[0].position.xy(), out[1].position.xy()) == doctest::Approx(0.525));
        CHECK(centroid(out).x == doctest::Approx(1.15));
        CHECK(centroid(out).y == doctest::Approx(1.0));
    }
    SUBCASE("no violation, no motion")
    {
        const auto pl = Placement::from_xy({{1, 1}, {2, 1}, {1, 2}}, 1, 3.0);
        const auto out = magnet_step(pl, 0.5, 0.05, rng);
        for (std::size_t i = 0; i < pl.size(); ++i) CHECK(out[i].position == pl[i].position);
    }
    SUBCASE("equilateral triangle expands about its centroid")
    {
        const double s = 0.3;
        const auto pl = Placement::from_xy({{0, 0}, {s, 0}, {s / 2, s * std::sqrt(3.0) / 2}}, 1, 3.0);
        const auto out = magnet_step(pl, 0.5, 0.05, rng);
        // Each vertex gets two pushes of (0.525 - 0.3) / 2 along its edges.
        const Vec2 c = centroid(pl);
        for (std::size_t i = 0; i < 3; ++i) {
            Vec2 total;
            for (std::size_t j = 0; j < 3; ++j) {
                if (i == j) continue;
                const Vec2 d = pl[i].position.xy() - pl[j].position.xy();
                total += (0.5 * (0.525 - s) / d.norm()) * d;
            }
            CHECK(out[i].position.x == doctest::Approx(pl[i].position.x + total.x));
            CHECK(out[i].position.y == doctest::Approx(pl[i].position.y + total.y));
        }
        CHECK(centroid(out).x == doctest::Approx(c.x));
        CHECK(centroid(out).y == doctest::Approx(c.y));
    }
    SUBCASE("coincident pair separates")
    {
        const auto pl = Placement::from_xy({{2, 2}, {2, 2}}, 1, 3.0);
        const auto out = magnet_step(pl, 0.5, 0.05, rng);
        CHECK(distance(out[0].position.xy(), out[1].position.xy()) == doctest::Approx(0.525));
    }
    SUBCASE("bystanders stay put and isolated pairs keep their centroid")
    {
        Rng r2 = make_rng(4);
        for (int k = 0; k < 50; ++k) {
            std::vector<Vec2> xy;
            for (int i = 0; i < 10; ++i) xy.push_back({uniform(r2, 0, 4), uniform(r2, 0, 4)});
            const auto pl = Placement::from_xy(xy, 1, 3.0);
            const auto out = magnet_step(pl, 0.5, 0.05, rng);
            const auto viol = spacing_violations(pl, 0.5);
            std::vector<int> degree(pl.size(), 0);
            for (const auto& [a, b] : viol) {
                ++degree[a];
                ++degree[b];
            }
            for (std::size_t i = 0; i < pl.size(); ++i) {
                if (degree[i] == 0) CHECK(out[i].position == pl[i].position);
            }
            for (const auto& [a, b] : viol) {
                if (degree[a] == 1 && degree[b] == 1) {
                    const Vec2 before = 0.5 * (pl[a].position.xy() + pl[b].position.xy());
                    const Vec2 after = 0.5 * (out[a].position.xy() + out[b].position.xy());
                    CHECK(distance(before, after) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("coverage violation centroids")
{
    auto room = fixtures::room(fixtures::rect(4, 4), 0.5);
    room.z_l = 2.5;
    room.z_r = 0.5;
    room.cone_half_angle = std::numbers::pi / 4;
    const auto g = Grid::build(room);

    SUBCASE("full coverage")
    {
        std::vector<VisibilityMask> masks(4, VisibilityMask{std::vector<std::uint8_t>(g.size(), 1)});
        CHECK(coverage_violation_centroids(g, masks, 4).empty());
    }
    SUBCASE("square block")
    {
        std::vector<VisibilityMask> masks(4, VisibilityMask{std::vector<std::uint8_t>(g.size(), 1)});
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.cell_x(i) >= 2 && g.cell_x(i) <= 4 && g.cell_y(i) >= 1 && g.cell_y(i) <= 3) masks[0].bits[i] = 0;
        }
        const auto c = coverage_violation_centroids(g, masks, 4);
        REQUIRE(c.size() == 1);
        CHECK(c[0].x == doctest::Approx(0.25 + 0.5 * 3));
        CHECK(c[0].y == doctest::Approx(0.25 + 0.5 * 2));
    }
    SUBCASE("components match a flood-fill labelling")
    {
        Rng rng = make_rng(2);
        std::vector<std::pair<int, int>> cells;
        for (std::size_t i = 0; i < g.size(); ++i) cells.emplace_back(g.cell_x(i), g.cell_y(i));
        for (int k = 0; k < 20; ++k) {
            std::vector<VisibilityMask> masks(4, VisibilityMask{std::vector<std::uint8_t>(g.size(), 1)});
            std::vector<bool> low(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                low[i] = uniform(rng, 0, 1) < 0.3;
                if (low[i]) masks[2].bits[i] = 0;
            }
            const auto comps = oracle::components(cells, low);
            const auto got = coverage_violation_centroids(g, masks, 4);
            REQUIRE(got.size() == comps.size());
            for (const auto& comp : comps) {
                Vec2 c;
                for (const auto i : comp) c += g.center(i).xy();
                c = (1.0 / static_cast<double>(comp.size())) * c;
                bool found = false;
                for (const auto& x : got) found = found || distance(x, c) < 1e-9;
                CHECK(found);
            }
        }
    }
}

TEST_CASE("gravitation step")
{
    const auto pl = Placement::from_xy({{0, 0}}, 1, 3.0);
    auto out = gravitation_step(pl, {{2, 0}}, 0.2);
    CHECK(out[0].position.x == doctest::Approx(0.4));

    out = gravitation_step(Placement::from_xy({{2, 0}}, 1, 3.0), {{2, 0}}, 0.2);
    CHECK(out[0].position.x == 2.0);

    out = gravitation_step(Placement::from_xy({{1, 0}}, 1, 3.0), {{0, 0}, {5, 0}}, 0.2);
    CHECK(out[0].position.x == doctest::Approx(0.8));

    out = gravitation_step(Placement::from_xy({{0, 0}}, 1, 3.0), {{20, 0}}, 0.2, 1.0);
    CHECK(out[0].position.x == doctest::Approx(1.0));

    CHECK_THROWS_AS(gravitation_step(pl, {}, 0.2), Error);

    Rng rng = make_rng(6);
    for (int k = 0; k < 100; ++k) {
        std::vector<Vec2> xy, cs;
        for (int i = 0; i < 5; ++i) xy.push_back({uniform(rng, 0, 10), uniform(rng, 0, 8)});
        for (int i = 0; i < 3; ++i) cs.push_back({uniform(rng, 0, 10), uniform(rng, 0, 8)});
        const auto before = Placement::from_xy(xy, 1, 3.0);
        const auto after = gravitation_step(before, cs, 0.2);
        for (std::size_t i = 0; i < before.size(); ++i) {
            double d0 = 1e300, d1 = 1e300;
            for (const auto& c : cs) {
                d0 = std::min(d0, distance(before[i].position.xy(), c));
                d1 = std::min(d1, distance(after[i].position.xy(), c));
            }
            if (d0 > 0.0) CHECK(d1 < d0);
        }
    }
}

TEST_CASE("repair")
{
    const auto room = fixtures::desk_room();
    const auto g = Grid::build(room);
    ObjectiveConfig cfg;
    cfg.n_types = 2;
    cfg.limits.m_max = 16;

    SUBCASE("feasible input is returned unchanged")
    {
        const auto pl = random_feasible(room, g, 12, cfg, {}, 3);
        REQUIRE(pl);
        Rng rng = make_rng(1);
        const auto res = repair(*pl, room, g, cfg, {}, rng);
        CHECK(res.feasible);
        CHECK(res.iterations == 0);
        for (std::size_t i = 0; i < pl->size(); ++i) CHECK(res.placement[i].position == (*pl)[i].position);
    }
    SUBCASE("too few reflectors cannot succeed")
    {
        Rng rng = make_rng(2);
        RepairConfig rc;
        rc.max_iter = 30;
        const auto res = repair(Placement::from_xy({{2, 2}, {3, 3}}, 2, room.z_l), room, g, cfg, rc, rng);
        CHECK_FALSE(res.feasible);
        CHECK(res.iterations == 30);
    }
    SUBCASE("clustered start reaches feasibility and passes the check")
    {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Rng rng = make_rng(seed);
            std::vector<Vec2> xy;
            for (int i = 0; i < 12; ++i) xy.push_back({uniform(rng, 2.0, 3.0), uniform(rng, 2.0, 3.0)});
            const auto res = repair(Placement::from_xy(xy, 2, room.z_l), room, g, cfg, {}, rng);
            if (res.feasible) {
                const auto masks = compute_masks(res.placement, g, room);
                CHECK(check_constraints(res.placement, room, g, masks, cfg.limits).feasible);
            }
        }
    }
    SUBCASE("deterministic for a seed")
    {
        std::vector<Vec2> xy;
        Rng r0 = make_rng(9);
        for (int i = 0; i < 12; ++i) xy.push_back({uniform(r0, 1.0, 2.0), uniform(r0, 1.0, 2.0)});
        Rng a = make_rng(5), b = make_rng(5);
        const auto ra = repair(Placement::from_xy(xy, 2, room.z_l), room, g, cfg, {}, a);
        const auto rb = repair(Placement::from_xy(xy, 2, room.z_l), room, g, cfg, {}, b);
        CHECK(ra.iterations == rb.iterations);
        for (std::size_t i = 0; i < ra.placement.size(); ++i) CHECK(ra.placement[i].position == rb.placement[i].position);
    }
}

TEST_CASE("random feasible placements")
{
    const auto room = fixtures::desk_room();
    const auto g = Grid::build(room);
    ObjectiveConfig cfg;
    cfg.n_types = 2;
    cfg.limits.m_max = 32;

    const auto a = random_feasible(room, g, 32, cfg, {}, 7);
    REQUIRE(a);
    CHECK(a->size() == 32);
    CHECK(check_constraints(*a, room, g, compute_masks(*a, g, room), cfg.limits).feasible);
    CHECK(a->count_type(0) == 16);

    const auto b = random_feasible(room, g, 32, cfg, {}, 7);
    REQUIRE(b);
    for (std::size_t i = 0; i < a->size(); ++i) CHECK((*a)[i].position == (*b)[i].position);

    RepairConfig quick;
    quick.max_iter = 20;
    quick.restarts = 2;
    CHECK_FALSE(random_feasible(room, g, 1, cfg, quick, 1).has_value());
}

TEST_CASE("margin sampling")
{
    const auto room = fixtures::desk_room();
    Rng rng = make_rng(12);
    for (int k = 0; k < 1000; ++k) CHECK(in_margin_region(sample_margin_region(room, rng), room));
}
