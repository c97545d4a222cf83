#include "lrpopt/geom.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace lrpopt {

namespace {

constexpr double kOnBoundaryTol = 1e-9;
constexpr double kMarginTol = 1e-9;

struct SegmentClosest {
    Vec2 point;
    double distance;
};

SegmentClosest closest_on_segment(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    return {q, distance(p, q)};
}

int orientation(Vec2 a, Vec2 b, Vec2 c)
{
    const double v = cross(b - a, c - a);
    const double scale = std::max({(b - a).norm() * (c - a).norm(), 1e-300});
    if (std::abs(v) <= 1e-14 * scale) {
        return 0;
    }
    return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p)
{
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

double signed_area(const std::vector<Vec2>& vertices)
{
    double acc = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        acc += cross(vertices[i], vertices[(i + 1) % n]);
    }
    return 0.5 * acc;
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices))
{
    const std::size_t n = vertices_.size();
    if (n < 3) {
        throw Error("polygon needs at least 3 vertices");
    }
    for (const auto& v : vertices_) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw Error("polygon vertex is not finite");
        }
    }
    if (signed_area(vertices_) <= 0.0) {
        throw Error("polygon must be counterclockwise with positive area");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                continue;
            }
            if (segments_intersect(vertices_[i], next(i), vertices_[j], next(j))) {
                throw Error("polygon edges " + std::to_string(i) + " and " + std::to_string(j) +
                            " intersect");
            }
        }
    }
    update_bbox();
}

Polygon::Polygon(std::vector<Vec2> vertices, Unchecked) : vertices_(std::move(vertices))
{
    update_bbox();
}

Polygon Polygon::from_any_orientation(std::vector<Vec2> vertices)
{
    if (signed_area(vertices) < 0.0) {
        std::reverse(vertices.begin(), vertices.end());
    }
    return Polygon(std::move(vertices));
}

void Polygon::update_bbox()
{
    bbox_min_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    bbox_max_ = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& v : vertices_) {
        bbox_min_.x = std::min(bbox_min_.x, v.x);
        bbox_min_.y = std::min(bbox_min_.y, v.y);
        bbox_max_.x = std::max(bbox_max_.x, v.x);
        bbox_max_.y = std::max(bbox_max_.y, v.y);
    }
}

double Polygon::area() const { return signed_area(vertices_); }

BoundaryPoint nearest_boundary_point(Vec2 p, const Polygon& poly)
{
    BoundaryPoint best{{}, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto c = closest_on_segment(p, poly[i], poly.next(i));
        if (c.distance < best.distance) {
            best = {c.point, i, c.distance};
        }
    }
    return best;
}

bool point_in_polygon(Vec2 p, const Polygon& poly)
{
    const Vec2 lo = poly.bbox_min();
    const Vec2 hi = poly.bbox_max();
    if (p.x < lo.x - kOnBoundaryTol || p.x > hi.x + kOnBoundaryTol || p.y < lo.y - kOnBoundaryTol ||
        p.y > hi.y + kOnBoundaryTol) {
        return false;
    }
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j];
        const Vec2 b = poly[i];
        if (closest_on_segment(p, a, b).distance <= kOnBoundaryTol) {
            return true;
        }
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

double boundary_distance(Vec2 p, const Polygon& poly)
{
    const double d = nearest_boundary_point(p, poly).distance;
    if (d <= kOnBoundaryTol) {
        return 0.0;
    }
    return point_in_polygon(p, poly) ? d : -d;
}

void RoomModel::validate() const
{
    if (!(grid_size > 0.0)) throw Error("grid_size must be positive");
    if (!(z_r > 0.0)) throw Error("z_r must be positive");
    if (!(z_l > z_r)) throw Error("z_l must exceed z_r");
    if (!(r_res > 0.0)) throw Error("r_res must be positive");
    if (!(cone_half_angle > 0.0 && cone_half_angle < std::numbers::pi / 2)) {
        throw Error("cone half-angle must lie in (0, pi/2)");
    }
    if (!(wall_margin >= 0.0)) throw Error("wall_margin must be non-negative");
}

Grid Grid::build(const RoomModel& room)
{
    room.validate();
    Grid grid;
    const double g = room.grid_size;
    const Vec2 lo = room.boundary.bbox_min();
    const Vec2 hi = room.boundary.bbox_max();
    grid.element_size_ = g;
    grid.origin_ = {lo.x + 0.5 * g, lo.y + 0.5 * g};
    grid.nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / g - 1e-9)));
    grid.ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / g - 1e-9)));
    grid.lattice_.assign(static_cast<std::size_t>(grid.nx_) * grid.ny_, kNoCell);
    for (int iy = 0; iy < grid.ny_; ++iy) {
        for (int ix = 0; ix < grid.nx_; ++ix) {
            const Vec2 c{lo.x + (ix + 0.5) * g, lo.y + (iy + 0.5) * g};
            if (!point_in_polygon(c, room.boundary)) {
                continue;
            }
            grid.lattice_[static_cast<std::size_t>(iy) * grid.nx_ + ix] =
                static_cast<std::int64_t>(grid.centers_.size());
            grid.centers_.push_back({c.x, c.y, room.z_r});
            grid.cells_.emplace_back(ix, iy);
        }
    }
    if (grid.centers_.empty()) {
        throw Error("grid has no element centers inside the room");
    }
    return grid;
}

std::int64_t Grid::at(int ix, int iy) const
{
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) {
        return kNoCell;
    }
    return lattice_[static_cast<std::size_t>(iy) * nx_ + ix];
}

std::optional<std::size_t> Grid::find_center(Vec2 p) const
{
    const int ix = static_cast<int>(std::lround((p.x - origin_.x) / element_size_));
    const int iy = static_cast<int>(std::lround((p.y - origin_.y) / element_size_));
    const auto idx = at(ix, iy);
    if (idx == kNoCell) {
        return std::nullopt;
    }
    const auto& c = centers_[static_cast<std::size_t>(idx)];
    if (std::abs(c.x - p.x) > 1e-9 || std::abs(c.y - p.y) > 1e-9) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(idx);
}

std::size_t Grid::nearest(Vec2 p) const
{
    const int cx = std::clamp(static_cast<int>(std::lround((p.x - origin_.x) / element_size_)), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>(std::lround((p.y - origin_.y) / element_size_)), 0, ny_ - 1);
    const auto direct = at(cx, cy);
    if (direct != kNoCell) {
        const auto& c = centers_[static_cast<std::size_t>(direct)];
        if (std::abs(c.x - p.x) <= 0.5 * element_size_ + 1e-12 &&
            std::abs(c.y - p.y) <= 0.5 * element_size_ + 1e-12) {
            return static_cast<std::size_t>(direct);
        }
    }
    // Ring search; a hit at Chebyshev radius r may be beaten by one up to r*sqrt(2).
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    int stop_at = std::max(nx_, ny_);
    for (int r = 0; r <= stop_at; ++r) {
        for (int iy = cy - r; iy <= cy + r; ++iy) {
            for (int ix = cx - r; ix <= cx + r; ++ix) {
                if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != r) {
                    continue;
                }
                const auto idx = at(ix, iy);
                if (idx == kNoCell) {
                    continue;
                }
                const double d = distance(p, centers_[static_cast<std::size_t>(idx)].xy());
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<std::size_t>(idx);
                }
            }
        }
        if (std::isfinite(best_d) && stop_at == std::max(nx_, ny_)) {
            stop_at = std::min(stop_at, static_cast<int>(std::ceil((r + 1) * std::numbers::sqrt2)) + 1);
        }
    }
    return best;
}

std::vector<std::size_t> Grid::neighbours4(std::size_t i) const
{
    std::vector<std::size_t> out;
    out.reserve(4);
    const auto [ix, iy] = cells_[i];
    for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        const auto idx = at(ix + dx, iy + dy);
        if (idx != kNoCell) {
            out.push_back(static_cast<std::size_t>(idx));
        }
    }
    return out;
}

Vec2 Grid::centroid() const
{
    Vec2 acc;
    for (const auto& c : centers_) {
        acc += c.xy();
    }
    return (1.0 / static_cast<double>(centers_.size())) * acc;
}

std::size_t VisibilityMask::count() const
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Polygon visibility_polygon(Vec2 viewpoint, const Polygon& poly)
{
    if (!point_in_polygon(viewpoint, poly) ||
        nearest_boundary_point(viewpoint, poly).distance <= kOnBoundaryTol) {
        throw Error("visibility viewpoint must lie strictly inside the polygon");
    }
    const std::size_t n = poly.size();

    struct Hit {
        double angle;
        Vec2 point;
    };
    std::vector<Hit> hits;
    hits.reserve(3 * n);

    auto cast = [&](double angle) {
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        double best_t = std::numeric_limits<double>::infinity();
        Vec2 best_point;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = poly[i];
            const Vec2 b = poly.next(i);
            const Vec2 e = b - a;
            const double denom = cross(dir, e);
            if (std::abs(denom) <= 1e-15 * e.norm()) {
                continue;
            }
            const Vec2 aq = a - viewpoint;
            const double t = cross(aq, e) / denom;
            const double u = cross(aq, dir) / denom;
            if (t <= 1e-12 || u < -1e-9 || u > 1.0 + 1e-9) {
                continue;
            }
            if (t < best_t) {
                best_t = t;
                if (u <= 1e-9) {
                    best_point = a;
                } else if (u >= 1.0 - 1e-9) {
                    best_point = b;
                } else {
                    best_point = viewpoint + t * dir;
                }
            }
        }
        if (std::isfinite(best_t)) {
            hits.push_back({angle, best_point});
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 d = poly[i] - viewpoint;
        const double angle = std::atan2(d.y, d.x);
        cast(angle - kVisibilityRayOffset);
        cast(angle);
        cast(angle + kVisibilityRayOffset);
    }

    // Offsets can leave (-pi, pi]; normalise before sorting.
    for (auto& h : hits) {
        if (h.angle <= -std::numbers::pi) h.angle += 2.0 * std::numbers::pi;
        if (h.angle > std::numbers::pi) h.angle -= 2.0 * std::numbers::pi;
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.angle < b.angle; });

    std::vector<Vec2> pts;
    pts.reserve(hits.size());
    for (const auto& h : hits) {
        if (pts.empty() || distance(pts.back(), h.point) > 1e-9) {
            pts.push_back(h.point);
        }
    }
    while (pts.size() > 1 && distance(pts.front(), pts.back()) <= 1e-9) {
        pts.pop_back();
    }

    // Drop collinear interior points left by the side rays.
    bool changed = true;
    while (changed && pts.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < pts.size() && pts.size() > 3; ++i) {
            const Vec2 a = pts[(i + pts.size() - 1) % pts.size()];
            const Vec2 b = pts[i];
            const Vec2 c = pts[(i + 1) % pts.size()];
            const Vec2 ab = b - a;
            const Vec2 bc = c - b;
            if (std::abs(cross(ab, bc)) <= 1e-10 * ab.norm() * bc.norm() && dot(ab, bc) > 0.0) {
                pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                --i;
            }
        }
    }
    if (pts.size() < 3) {
        throw Error("degenerate visibility polygon");
    }
    return Polygon(std::move(pts), Polygon::Unchecked{});
}

namespace {

template <typename Fn>
void for_each_in_radius(const Grid& grid, Vec2 centre, double radius, Fn&& fn)
{
    const double g = grid.element_size();
    const Vec2 o = grid.origin();
    const int x0 = std::max(0, static_cast<int>(std::floor((centre.x - radius - o.x) / g)) - 1);
    const int x1 = std::min(grid.nx() - 1, static_cast<int>(std::ceil((centre.x + radius - o.x) / g)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor((centre.y - radius - o.y) / g)) - 1);
    const int y1 = std::min(grid.ny() - 1, static_cast<int>(std::ceil((centre.y + radius - o.y) / g)) + 1);
    const double r2 = radius * radius + 1e-12;
    for (int iy = y0; iy <= y1; ++iy) {
        for (int ix = x0; ix <= x1; ++ix) {
            const auto idx = grid.at(ix, iy);
            if (idx == Grid::kNoCell) {
                continue;
            }
            const auto i = static_cast<std::size_t>(idx);
            if ((grid.center(i).xy() - centre).squared_norm() <= r2) {
                fn(i);
            }
        }
    }
}

}  // namespace

VisibilityMask cone_mask(const Vec3& reflector, const Grid& grid, const RoomModel& room)
{
    VisibilityMask mask;
    mask.bits.assign(grid.size(), 0);
    const double radius = (reflector.z - room.z_r) * std::tan(room.cone_half_angle);
    if (radius < 0.0) {
        return mask;
    }
    for_each_in_radius(grid, reflector.xy(), radius, [&](std::size_t i) { mask.bits[i] = 1; });
    return mask;
}

VisibilityMask visibility_mask(const Vec3& reflector, const Grid& grid, const RoomModel& room)
{
    VisibilityMask mask;
    mask.bits.assign(grid.size(), 0);
    const double radius = (reflector.z - room.z_r) * std::tan(room.cone_half_angle);
    if (radius < 0.0) {
        return mask;
    }
    const Polygon visible = visibility_polygon(reflector.xy(), room.boundary);
    for_each_in_radius(grid, reflector.xy(), radius, [&](std::size_t i) {
        if (point_in_polygon(grid.center(i).xy(), visible)) {
            mask.bits[i] = 1;
        }
    });
    return mask;
}

bool in_margin_region(Vec2 p, const RoomModel& room)
{
    return point_in_polygon(p, room.boundary) &&
           nearest_boundary_point(p, room.boundary).distance >= room.wall_margin - kMarginTol;
}

Vec2 project_into_margin(Vec2 p, const RoomModel& room)
{
    if (in_margin_region(p, room)) {
        return p;
    }
    const Polygon& poly = room.boundary;
    Vec2 current = p;
    for (int iter = 0; iter < 50; ++iter) {
        const auto bp = nearest_boundary_point(current, poly);
        Vec2 dir;
        if (bp.distance > 1e-12 && point_in_polygon(current, poly)) {
            dir = (1.0 / bp.distance) * (current - bp.point);
        } else {
            const Vec2 e = poly.next(bp.edge) - poly[bp.edge];
            dir = (1.0 / e.norm()) * Vec2{-e.y, e.x};
        }
        Vec2 candidate = bp.point + room.wall_margin * dir;
        if (in_margin_region(candidate, room)) {
            return candidate;
        }
        // Halve the move when it made no progress toward the region.
        const double before = boundary_distance(current, poly);
        if (boundary_distance(candidate, poly) <= before && iter > 0) {
            candidate = current + 0.5 * (candidate - current);
        }
        current = candidate;
    }
    throw Error("could not project point into the wall-margin region");
}

}  // namespace lrpopt
