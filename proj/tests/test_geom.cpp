#include "fixtures.hpp"
#include "oracles.hpp"

#include "lrpopt/geom.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lrpopt;
using fixtures::rect;

TEST_CASE("polygon construction validates its input")
{
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), Error);
    CHECK_THROWS_AS(Polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), Error);  // clockwise
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);  // bow tie
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {std::nan(""), 1}}), Error);
    const auto p = Polygon::from_any_orientation({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(p.area() == doctest::Approx(1.0));
    CHECK(signed_area(p.vertices()) > 0.0);
}

TEST_CASE("point in polygon on the unit square")
{
    const Polygon sq(rect(1, 1));
    CHECK(point_in_polygon({0.5, 0.5}, sq));
    CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
    CHECK(point_in_polygon({1.0, 0.5}, sq));
    CHECK(point_in_polygon({0.0, 0.0}, sq));
}

TEST_CASE("boundary distance is signed")
{
    const Polygon sq(rect(1, 1));
    CHECK(boundary_distance({0.5, 0.5}, sq) == doctest::Approx(0.5));
    CHECK(boundary_distance({-0.25, 0.5}, sq) == doctest::Approx(-0.25));
    CHECK(boundary_distance({0.1, 0.5}, sq) == doctest::Approx(0.1));
    CHECK(boundary_distance({1.0, 0.3}, sq) == 0.0);
}

TEST_CASE("room model invariants")
{
    auto r = fixtures::room(rect(4, 4), 0.1);
    CHECK_NOTHROW(r.validate());
    r.z_l = 0.4;
    CHECK_THROWS_AS(r.validate(), Error);
    r = fixtures::room(rect(4, 4), 0.0);
    CHECK_THROWS_AS(r.validate(), Error);
    r = fixtures::room(rect(4, 4), 0.1);
    r.cone_half_angle = std::numbers::pi / 2;
    CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("grid construction")
{
    SUBCASE("1 m square at 0.5 m")
    {
        const auto room = fixtures::room(rect(1, 1), 0.5);
        const auto g = Grid::build(room);
        REQUIRE(g.size() == 4);
        const std::vector<Vec2> expected{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
        for (const auto& e : expected) {
            const auto idx = g.find_center(e);
            REQUIRE(idx.has_value());
            CHECK(g.center(*idx).z == room.z_r);
        }
    }
    SUBCASE("10 x 8 rectangle at 0.1 m")
    {
        CHECK(Grid::build(fixtures::room(rect(10, 8), 0.1)).size() == 8000);
    }
    SUBCASE("L-room at 0.1 m matches a lattice count")
    {
        const auto room = fixtures::room(fixtures::l_shape(), 0.1);
        const auto g = Grid::build(room);
        std::size_t count = 0;
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 80; ++j)
                if (oracle::inside({0.05 + 0.1 * i, 0.05 + 0.1 * j}, fixtures::l_shape())) ++count;
        CHECK(count == 6000);
        CHECK(g.size() == count);
    }
    SUBCASE("lattice structure")
    {
        const auto room = fixtures::room(fixtures::l_shape(), 0.2);
        const auto g = Grid::build(room);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto c = g.center(i);
            CHECK(boundary_distance(c.xy(), room.boundary) > 0.0);
            CHECK(c.x == doctest::Approx(0.1 + 0.2 * g.cell_x(i)));
            CHECK(c.y == doctest::Approx(0.1 + 0.2 * g.cell_y(i)));
            CHECK(g.at(g.cell_x(i), g.cell_y(i)) == static_cast<std::int64_t>(i));
            CHECK(g.nearest(c.xy()) == i);
        }
        CHECK(g.at(40, 30) == Grid::kNoCell);  // the missing corner
    }
    SUBCASE("empty grid is an error")
    {
        // A sliver thinner than half a cell holds no lattice center.
        auto room = fixtures::room({{0, 0}, {10, 0}, {10, 0.01}, {0, 0.01}}, 1.0);
        room.wall_margin = 0.0;
        CHECK_THROWS_AS(Grid::build(room), Error);
    }
}

TEST_CASE("nearest grid element")
{
    const auto g = Grid::build(fixtures::room(fixtures::l_shape(), 0.2));
    Rng rng = make_rng(3);
    for (int k = 0; k < 300; ++k) {
        const Vec2 p{uniform(rng, -1, 11), uniform(rng, -1, 9)};
        double best = 1e300;
        for (std::size_t i = 0; i < g.size(); ++i) best = std::min(best, (g.center(i).xy() - p).squared_norm());
        CHECK((g.center(g.nearest(p)).xy() - p).squared_norm() == doctest::Approx(best));
    }
}

TEST_CASE("visibility polygon")
{
    SUBCASE("convex room sees everything")
    {
        const Polygon hex({{0, 0}, {4, -1}, {7, 1}, {6, 5}, {2, 6}, {-1, 3}});
        Rng rng = make_rng(11);
        for (int k = 0; k < 20; ++k) {
            Vec2 q;
            do {
                q = {uniform(rng, -1, 7), uniform(rng, -1, 6)};
            } while (boundary_distance(q, hex) <= 1e-3);
            CHECK(visibility_polygon(q, hex).area() == doctest::Approx(hex.area()).epsilon(1e-9));
        }
    }
    SUBCASE("square from its center is the square")
    {
        const Polygon sq(rect(2, 2));
        const auto v = visibility_polygon({1, 1}, sq);
        REQUIRE(v.size() == 4);
        for (const auto& c : sq.vertices()) {
            bool found = false;
            for (const auto& w : v.vertices()) found = found || distance(c, w) < 1e-9;
            CHECK(found);
        }
    }
    SUBCASE("L-room arm against a lattice oracle")
    {
        const Polygon l(fixtures::l_shape());
        const Vec2 q{8, 2};
        const double area = visibility_polygon(q, l).area();
        CHECK(area < l.area());
        const double mc = oracle::visible_area(q, fixtures::l_shape(), 400);
        CHECK(std::abs(area - mc) / mc < 0.01);
    }
    SUBCASE("output is simple and contained")
    {
        const auto u = fixtures::u_shape();
        const Polygon room(u);
        Rng rng = make_rng(5);
        for (int k = 0; k < 30; ++k) {
            Vec2 q;
            do {
                q = {uniform(rng, 0, 9), uniform(rng, 0, 7)};
            } while (boundary_distance(q, room) <= 1e-3);
            const auto v = visibility_polygon(q, room);  // constructor rejects non-simple output
            for (const auto& p : v.vertices()) CHECK(boundary_distance(p, room) >= -1e-9);
            for (std::size_t i = 0; i < v.size(); ++i) {
                const Vec2 a = v[i];
                const Vec2 b = v.next(i);
                for (std::size_t j = 0; j < u.size(); ++j) CHECK_FALSE(oracle::crosses_beyond(a, b, u[j], u[(j + 1) % u.size()], 1e-9));
            }
        }
    }
    SUBCASE("viewpoint outside is an error")
    {
        CHECK_THROWS_AS(visibility_polygon({5, 5}, Polygon(rect(1, 1))), Error);
    }
}

TEST_CASE("cone mask radius")
{
    auto room = fixtures::room(rect(10, 10), 0.1);
    room.z_r = 0.5;
    room.z_l = 2.5;
    const auto g = Grid::build(room);
    const Vec3 q{5.05, 5.05, room.z_l};
    auto bit = [&](const VisibilityMask& m, double dx) { return m[*g.find_center({5.05 + dx, 5.05})]; };

    const auto m45 = cone_mask(q, g, room);
    CHECK(m45.size() == g.size());
    CHECK(bit(m45, 1.9));
    CHECK_FALSE(bit(m45, 2.1));

    room.cone_half_angle = std::numbers::pi / 6;
    CHECK(room.cone_radius() == doctest::Approx(1.1547).epsilon(1e-4));
    const auto m30 = cone_mask(q, g, room);
    CHECK(bit(m30, 1.1));
    CHECK_FALSE(bit(m30, 1.2));
}

TEST_CASE("visibility mask")
{
    SUBCASE("wide cone in a convex room sets every bit")
    {
        auto room = fixtures::room(rect(4, 4), 0.25);
        room.cone_half_angle = 89.0 * std::numbers::pi / 180.0;
        const auto g = Grid::build(room);
        const auto m = visibility_mask({2.125, 2.125, room.z_l}, g, room);
        CHECK(m.count() == g.size());
    }
    SUBCASE("vanishing cone keeps only the cell below")
    {
        auto room = fixtures::room(rect(4, 4), 0.25);
        room.cone_half_angle = 1e-9;
        const auto g = Grid::build(room);
        const Vec3 q{2.1, 1.4, room.z_l};
        const auto m = visibility_mask(q, g, room);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (m[i]) {
                CHECK(std::abs(g.center(i).x - q.x) <= 0.125);
                CHECK(std::abs(g.center(i).y - q.y) <= 0.125);
            }
        }
    }
    SUBCASE("L-room equals cone AND line of sight")
    {
        const auto room = fixtures::room(fixtures::l_shape(), 0.1);
        const auto g = Grid::build(room);
        for (const Vec3 q : {Vec3{7.13, 2.71, 3.0}, Vec3{2.37, 6.29, 3.0}, Vec3{4.41, 3.33, 3.0}}) {
            const auto m = visibility_mask(q, g, room);
            const double r = room.cone_radius();
            std::size_t mismatches = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Vec2 c = g.center(i).xy();
                const bool expect = distance(c, q.xy()) <= r + 1e-9 && oracle::sees(q.xy(), c, fixtures::l_shape());
                if (m[i] != expect) ++mismatches;
            }
            CHECK(mismatches == 0);
        }
    }
    SUBCASE("monotone in the cone half-angle")
    {
        auto room = fixtures::room(fixtures::u_shape(), 0.2);
        const auto g = Grid::build(room);
        const Vec3 q{1.3, 5.1, room.z_l};
        VisibilityMask prev;
        for (const double deg : {10.0, 25.0, 40.0, 55.0, 70.0, 85.0}) {
            room.cone_half_angle = deg * std::numbers::pi / 180.0;
            const auto m = visibility_mask(q, g, room);
            if (!prev.bits.empty()) {
                for (std::size_t i = 0; i < g.size(); ++i) CHECK((!prev[i] || m[i]));
            }
            prev = m;
        }
    }
}

TEST_CASE("projection into the wall margin")
{
    auto room = fixtures::room(rect(4, 4), 0.1);
    room.wall_margin = 0.5;
    CHECK(project_into_margin({2, 2}, room) == Vec2{2, 2});
    const Vec2 a = project_into_margin({0.1, 2}, room);
    CHECK(a.x == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(a.y == doctest::Approx(2.0).epsilon(1e-6));

    const Vec2 b = project_into_margin({0.1, 0.1}, room);
    // Nearest point of the margin contour by dense sampling.
    Vec2 best;
    double best_d = 1e300;
    for (int k = 0; k <= 30000; ++k) {
        const double t = 3.0 * k / 30000.0;
        for (const Vec2 c : {Vec2{0.5 + t, 0.5}, Vec2{0.5, 0.5 + t}, Vec2{3.5, 0.5 + t}, Vec2{0.5 + t, 3.5}}) {
            const double d = distance(c, {0.1, 0.1});
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
    }
    CHECK(distance(b, best) < 1e-3);
    CHECK(b.x == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(b.y == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("projection properties on concave rooms")
{
    for (const auto& poly : {fixtures::l_shape(), fixtures::u_shape()}) {
        auto room = fixtures::room(poly, 0.2);
        Rng rng = make_rng(17);
        for (int k = 0; k < 400; ++k) {
            const Vec2 p{uniform(rng, -2, 12), uniform(rng, -2, 10)};
            const Vec2 once = project_into_margin(p, room);
            const Vec2 twice = project_into_margin(once, room);
            CHECK(distance(once, twice) <= 1e-6);
            CHECK(boundary_distance(once, room.boundary) >= room.wall_margin - 1e-6);
            if (!in_margin_region(p, room)) {
                CHECK(boundary_distance(once, room.boundary) == doctest::Approx(room.wall_margin).epsilon(1e-6));
            }
        }
    }
}
