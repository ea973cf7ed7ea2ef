#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "oblab/errors.hpp"

namespace oblab::grid {

using Point = std::vector<double>;

/// Scalar field on a uniform box grid. Nodes at origin + index * h per axis.
struct GridField {
    int dim = 2;
    std::array<int, 3> shape{0, 0, 1};  // nodes per axis; shape[2] == 1 in 2-D
    double h = 0.0;
    std::array<double, 3> origin{0, 0, 0};
    std::vector<double> v;

    static GridField make(int dim, std::array<int, 3> shape, double h,
                          std::array<double, 3> origin);

    std::size_t size() const { return v.size(); }
    std::size_t index(int i, int j, int k = 0) const {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(shape[1]) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(shape[0]) +
               static_cast<std::size_t>(i);
    }
    double& at(int i, int j, int k = 0) { return v[index(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return v[index(i, j, k)]; }

    Point coord(int i, int j, int k = 0) const;
    Point coord_of(std::size_t flat) const;
    bool is_boundary(int i, int j, int k = 0) const;

    // Distance from x to the box boundary.
    double boundary_distance(const Point& x) const;
    bool contains_ball(const Point& x, double r) const { return boundary_distance(x) > r; }

    // Bilinear (2-D) / trilinear (3-D) interpolation. Pre: x inside the box.
    double interpolate(const Point& x) const;

    // Cubic Lagrange interpolation on a 4^n stencil, exact for cubics, error
    // O(h^4). Pre: x at least 2h away from the box boundary.
    double interpolate_cubic(const Point& x) const;
};

// Little-endian float64 raster with a one-line JSON header.
void write_grid(const GridField& g, const std::string& path);
GridField read_grid(const std::string& path);

// CSV of an indicator or scalar per node: columns x..z, value.
void write_csv(const GridField& g, const std::string& path);

}  // namespace oblab::grid
