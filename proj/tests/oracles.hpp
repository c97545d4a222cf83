// Reference implementations for tests. Each one follows the textbook
// definition as directly as possible and shares no code with the library.
#pragma once

#include "lrpopt/geom.hpp"
#include "lrpopt/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>
#include <vector>

namespace oracle {

using lrpopt::Vec2;
using lrpopt::Vec3;

inline bool inside(Vec2 p, const std::vector<Vec2>& v)
{
    bool in = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y) &&
            p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x) {
            in = !in;
        }
    }
    return in;
}

inline double orient(Vec2 a, Vec2 b, Vec2 c)
{
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool proper_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

/// Proper crossing with orientations below eps treated as touching.
inline bool crosses_beyond(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps)
{
    auto side = [eps](double o) { return o > eps ? 1 : (o < -eps ? -1 : 0); };
    const int o1 = side(orient(a, b, c));
    const int o2 = side(orient(a, b, d));
    const int o3 = side(orient(c, d, a));
    const int o4 = side(orient(c, d, b));
    return o1 * o2 < 0 && o3 * o4 < 0;
}

/// Line of sight between q and p: the segment crosses no wall.
inline bool sees(Vec2 q, Vec2 p, const std::vector<Vec2>& v)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (proper_cross(q, p, v[i], v[(i + 1) % v.size()])) {
            return false;
        }
    }
    return true;
}

inline double shoelace(const std::vector<Vec2>& v)
{
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 p = v[i];
        const Vec2 q = v[(i + 1) % v.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

/// Visible area from q estimated on a k x k stratified lattice over the bbox.
inline double visible_area(Vec2 q, const std::vector<Vec2>& v, int k)
{
    double x0 = v[0].x, x1 = v[0].x, y0 = v[0].y, y1 = v[0].y;
    for (const auto& p : v) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double dx = (x1 - x0) / k;
    const double dy = (y1 - y0) / k;
    long hits = 0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const Vec2 p{x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy};
            if (inside(p, v) && sees(q, p, v)) ++hits;
        }
    }
    return static_cast<double>(hits) * dx * dy;
}

/// Star-shaped simple polygon around c, counterclockwise.
inline std::vector<Vec2> star_polygon(lrpopt::Rng& rng, int n, Vec2 c, double r_lo, double r_hi)
{
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Jittered sectors keep neighbouring angles apart.
        angles[static_cast<std::size_t>(i)] =
            (i + lrpopt::uniform(rng, 0.15, 0.85)) * 2.0 * std::numbers::pi / n;
    }
    std::vector<Vec2> v;
    for (const double a : angles) {
        const double r = lrpopt::uniform(rng, r_lo, r_hi);
        v.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    return v;
}

inline double det3(const std::array<std::array<double, 3>, 3>& m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Trace of the inverse via the adjugate: sum of diagonal cofactors / det.
inline double trace_inverse3(const std::array<std::array<double, 3>, 3>& m)
{
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    const double c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return (c00 + c11 + c22) / det3(m);
}

inline std::array<std::array<double, 3>, 3> fim(Vec3 p, const std::vector<Vec3>& refl)
{
    std::array<std::array<double, 3>, 3> m{};
    for (const auto& q : refl) {
        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double h[3] = {dx / n, dy / n, dz / n};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m[a][b] += h[a] * h[b];
    }
    return m;
}

inline double gdop(Vec3 p, const std::vector<Vec3>& refl, double sigma)
{
    return trace_inverse3(fim(p, refl)) * sigma * sigma;
}

/// Minimum assignment cost by enumerating every injective row-to-column map.
inline double brute_assignment(const std::vector<std::vector<double>>& c)
{
    const std::size_t rows = c.size();
    const std::size_t cols = c.front().size();
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += c[i][perm[i]];
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Connected components (4-neighbourhood on integer cell coordinates) of the
/// cells flagged true, by breadth-first search over a coordinate map.
inline std::vector<std::vector<std::size_t>> components(const std::vector<std::pair<int, int>>& cells,
                                                        const std::vector<bool>& flag)
{
    std::map<std::pair<int, int>, std::size_t> at;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (flag[i]) at[cells[i]] = i;
    std::vector<bool> seen(cells.size(), false);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < cells.size(); ++s) {
        if (!flag[s] || seen[s]) continue;
        std::vector<std::size_t> comp;
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = true;
        while (!q.empty()) {
            const auto c = q.front();
            q.pop();
            comp.push_back(c);
            const auto [x, y] = cells[c];
            for (const auto& d : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
                const auto it = at.find({x + d.first, y + d.second});
                if (it != at.end() && !seen[it->second]) {
                    seen[it->second] = true;
                    q.push(it->second);
                }
            }
        }
        out.push_back(comp);
    }
    return out;
}

}  // namespace oracle
