#pragma once

#include "lrpopt/geom.hpp"

#include <vector>

namespace fixtures {

using lrpopt::Polygon;
using lrpopt::RoomModel;
using lrpopt::Vec2;

inline std::vector<Vec2> rect(double w, double h)
{
    return {{0, 0}, {w, 0}, {w, h}, {0, h}};
}

inline std::vector<Vec2> l_shape()
{
    return {{0, 0}, {10, 0}, {10, 4}, {5, 4}, {5, 8}, {0, 8}};
}

inline std::vector<Vec2> u_shape()
{
    return {{0, 0}, {9, 0}, {9, 7}, {6, 7}, {6, 3}, {3, 3}, {3, 7}, {0, 7}};
}

inline RoomModel room(std::vector<Vec2> poly, double grid_size)
{
    RoomModel r{Polygon(std::move(poly))};
    r.grid_size = grid_size;
    return r;
}

/// The desk-scale L-room: 0.2 m grid, cone radius 5 m.
inline RoomModel desk_room()
{
    RoomModel r = room(l_shape(), 0.2);
    r.z_r = 0.5;
    r.z_l = 5.5;
    return r;
}

}  // namespace fixtures
