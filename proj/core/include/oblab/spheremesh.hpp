#pragma once

#include <cstddef>
#include <vector>

namespace oblab {

// Reference unit-sphere quadrature: uniform angles in 2-D (trapezoid is
// spectrally accurate there), Gauss-Legendre x uniform product in 3-D.
// Antipodal and axis-reflection maps are exact index maps, so parity
// cancellations hold to rounding.
struct SphereMesh {
    int dim = 2;
    std::vector<std::vector<double>> points;  // unit vectors
    std::vector<double> weights;              // sum = |S^{n-1}|
    std::vector<std::size_t> reflect_last;    // index map for x_n -> -x_n

    static const SphereMesh& get(int dim, int resolution = 256);
    static SphereMesh make(int dim, int resolution);
};

// Gauss-Legendre nodes and weights on [-1, 1], exactly symmetric.
std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights);

}  // namespace oblab
