#include "oblab/spheremesh.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace oblab {

std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights) {
    std::vector<double> x(static_cast<std::size_t>(n));
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = -z;
        x[static_cast<std::size_t>(n - 1 - i)] = z;
        double w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
    return x;
}

SphereMesh SphereMesh::make(int dim, int resolution) {
    SphereMesh m;
    m.dim = dim;
    if (dim == 2) {
        int n = std::max(16, resolution - resolution % 2);
        double w = 2.0 * M_PI / n;
        for (int s = 0; s < n; ++s) {
            double th = w * static_cast<double>(s);
            m.points.push_back({std::cos(th), std::sin(th)});
            m.weights.push_back(w);
            m.reflect_last.push_back(static_cast<std::size_t>((n - s) % n));
        }
        return m;
    }
    int ngl = std::max(8, resolution / 8);
    int nphi = std::max(16, resolution / 4 - (resolution / 4) % 2);
    std::vector<double> wgl;
    auto cgl = gauss_legendre_nodes(ngl, wgl);
    double wphi = 2.0 * M_PI / nphi;
    for (int i = 0; i < ngl; ++i) {
        double c = cgl[static_cast<std::size_t>(i)];
        double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < nphi; ++j) {
            double phi = wphi * j;
            m.points.push_back({s * std::cos(phi), s * std::sin(phi), c});
            m.weights.push_back(wgl[static_cast<std::size_t>(i)] * wphi);
            m.reflect_last.push_back(static_cast<std::size_t>(ngl - 1 - i) *
                                         static_cast<std::size_t>(nphi) +
                                     static_cast<std::size_t>(j));
        }
    }
    return m;
}

const SphereMesh& SphereMesh::get(int dim, int resolution) {
    static std::map<std::pair<int, int>, SphereMesh> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto key = std::make_pair(dim, resolution);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, make(dim, resolution)).first;
    return it->second;
}

}  // namespace oblab
