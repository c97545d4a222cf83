#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrpopt {

/// Raised for invalid geometry, inconsistent inputs and unrecoverable
/// evaluation failures throughout the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    friend bool operator==(Vec2, Vec2) = default;

    [[nodiscard]] double norm() const { return std::hypot(x, y); }
    [[nodiscard]] double squared_norm() const { return x * x + y * y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] Vec2 xy() const { return {x, y}; }
    friend bool operator==(Vec3, Vec3) = default;
};

inline double distance(Vec3 a, Vec3 b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Simple counterclockwise polygon. Construction validates the vertex count,
/// orientation and the absence of self-intersections.
class Polygon {
public:
    explicit Polygon(std::vector<Vec2> vertices);

    /// Accepts either orientation and reverses clockwise input.
    static Polygon from_any_orientation(std::vector<Vec2> vertices);

    [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
    [[nodiscard]] std::size_t size() const { return vertices_.size(); }
    [[nodiscard]] const Vec2& operator[](std::size_t i) const { return vertices_[i]; }
    [[nodiscard]] const Vec2& next(std::size_t i) const { return vertices_[(i + 1) % vertices_.size()]; }

    [[nodiscard]] double area() const;
    [[nodiscard]] Vec2 bbox_min() const { return bbox_min_; }
    [[nodiscard]] Vec2 bbox_max() const { return bbox_max_; }

private:
    struct Unchecked {};
    Polygon(std::vector<Vec2> vertices, Unchecked);
    void update_bbox();

    std::vector<Vec2> vertices_;
    Vec2 bbox_min_;
    Vec2 bbox_max_;

    friend Polygon visibility_polygon(Vec2 viewpoint, const Polygon& poly);
};

double signed_area(const std::vector<Vec2>& vertices);

/// Closed-set membership: points on the boundary count as inside.
bool point_in_polygon(Vec2 p, const Polygon& poly);

/// Distance to the nearest boundary edge; positive inside, negative outside.
double boundary_distance(Vec2 p, const Polygon& poly);

/// Closest point on the boundary together with the index of the edge it lies on.
struct BoundaryPoint {
    Vec2 point;
    std::size_t edge = 0;
    double distance = 0.0;
};
BoundaryPoint nearest_boundary_point(Vec2 p, const Polygon& poly);

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

struct RoomModel {
    Polygon boundary;
    double grid_size = 0.1;
    double z_r = 0.5;
    double z_l = 3.0;
    double r_res = 0.075;
    double cone_half_angle = 0.7853981633974483;
    double wall_margin = 0.5;

    /// Throws Error when any scalar invariant is violated.
    void validate() const;

    /// Horizontal radius of the detection cone at reflector height.
    [[nodiscard]] double cone_radius() const { return (z_l - z_r) * std::tan(cone_half_angle); }
};

/// Grid element centers inside the room on a regular lattice anchored at the
/// bounding-box minimum corner plus half a cell.
class Grid {
public:
    static constexpr std::int64_t kNoCell = -1;

    static Grid build(const RoomModel& room);

    [[nodiscard]] std::size_t size() const { return centers_.size(); }
    [[nodiscard]] const std::vector<Vec3>& centers() const { return centers_; }
    [[nodiscard]] const Vec3& center(std::size_t i) const { return centers_[i]; }
    [[nodiscard]] double element_size() const { return element_size_; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] Vec2 origin() const { return origin_; }

    /// Lattice coordinates of element i.
    [[nodiscard]] int cell_x(std::size_t i) const { return cells_[i].first; }
    [[nodiscard]] int cell_y(std::size_t i) const { return cells_[i].second; }

    /// Element index at lattice coordinates, or kNoCell.
    [[nodiscard]] std::int64_t at(int ix, int iy) const;

    /// Index of the element whose center coincides with p (within 1e-9 m).
    [[nodiscard]] std::optional<std::size_t> find_center(Vec2 p) const;

    /// Index of the element whose center is nearest to p.
    [[nodiscard]] std::size_t nearest(Vec2 p) const;

    /// 4-connected neighbours of element i that exist in the grid.
    [[nodiscard]] std::vector<std::size_t> neighbours4(std::size_t i) const;

    /// Mean (x, y) over all centers.
    [[nodiscard]] Vec2 centroid() const;

private:
    std::vector<Vec3> centers_;
    std::vector<std::pair<int, int>> cells_;
    std::vector<std::int64_t> lattice_;
    Vec2 origin_;
    double element_size_ = 0.0;
    int nx_ = 0;
    int ny_ = 0;
};

struct VisibilityMask {
    std::vector<std::uint8_t> bits;

    [[nodiscard]] std::size_t size() const { return bits.size(); }
    [[nodiscard]] bool operator[](std::size_t i) const { return bits[i] != 0; }
    [[nodiscard]] std::size_t count() const;
};

/// Angular offset of the side rays cast past every vertex.
inline constexpr double kVisibilityRayOffset = 1e-4;

/// Region of poly with unobstructed view of the viewpoint, by ray casting
/// toward every vertex and slightly to either side of it.
Polygon visibility_polygon(Vec2 viewpoint, const Polygon& poly);

VisibilityMask cone_mask(const Vec3& reflector, const Grid& grid, const RoomModel& room);
VisibilityMask visibility_mask(const Vec3& reflector, const Grid& grid, const RoomModel& room);

/// Membership of the margin region (inside the room, at least wall_margin from
/// every wall), with a small tolerance for points placed on the contour.
bool in_margin_region(Vec2 p, const RoomModel& room);

/// Moves p onto the margin contour when it is outside the margin region.
/// Throws Error if no feasible point is found within the iteration cap.
Vec2 project_into_margin(Vec2 p, const RoomModel& room);

}  // namespace lrpopt
