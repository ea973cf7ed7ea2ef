#include "oblab/grid.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace oblab::grid {

using nlohmann::ordered_json;

GridField GridField::make(int dim, std::array<int, 3> shape, double h,
                          std::array<double, 3> origin) {
    if (dim != 2 && dim != 3) throw InvalidInput("GridField: dim must be 2 or 3");
    if (h <= 0) throw InvalidInput("GridField: spacing must be positive");
    GridField g;
    g.dim = dim;
    g.shape = shape;
    if (dim == 2) g.shape[2] = 1;
    g.h = h;
    g.origin = origin;
    std::size_t n = static_cast<std::size_t>(g.shape[0]) * static_cast<std::size_t>(g.shape[1]) *
                    static_cast<std::size_t>(g.shape[2]);
    g.v.assign(n, 0.0);
    return g;
}

Point GridField::coord(int i, int j, int k) const {
    Point x(static_cast<std::size_t>(dim));
    x[0] = origin[0] + h * i;
    x[1] = origin[1] + h * j;
    if (dim == 3) x[2] = origin[2] + h * k;
    return x;
}

Point GridField::coord_of(std::size_t flat) const {
    int i = static_cast<int>(flat % static_cast<std::size_t>(shape[0]));
    std::size_t rest = flat / static_cast<std::size_t>(shape[0]);
    int j = static_cast<int>(rest % static_cast<std::size_t>(shape[1]));
    int k = static_cast<int>(rest / static_cast<std::size_t>(shape[1]));
    return coord(i, j, k);
}

bool GridField::is_boundary(int i, int j, int k) const {
    if (i == 0 || i == shape[0] - 1 || j == 0 || j == shape[1] - 1) return true;
    if (dim == 3 && (k == 0 || k == shape[2] - 1)) return true;
    return false;
}

double GridField::boundary_distance(const Point& x) const {
    double d = 1e300;
    for (int a = 0; a < dim; ++a) {
        double lo = origin[static_cast<std::size_t>(a)];
        double hi = lo + h * (shape[static_cast<std::size_t>(a)] - 1);
        d = std::min(d, x[static_cast<std::size_t>(a)] - lo);
        d = std::min(d, hi - x[static_cast<std::size_t>(a)]);
    }
    return d;
}

double GridField::interpolate(const Point& x) const {
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    double fx = (x[0] - origin[0]) / h;
    double fy = (x[1] - origin[1]) / h;
    int i = clampi(static_cast<int>(std::floor(fx)), 0, shape[0] - 2);
    int j = clampi(static_cast<int>(std::floor(fy)), 0, shape[1] - 2);
    double tx = fx - i, ty = fy - j;
    if (dim == 2) {
        double a = at(i, j) * (1 - tx) + at(i + 1, j) * tx;
        double b = at(i, j + 1) * (1 - tx) + at(i + 1, j + 1) * tx;
        return a * (1 - ty) + b * ty;
    }
    double fz = (x[2] - origin[2]) / h;
    int k = clampi(static_cast<int>(std::floor(fz)), 0, shape[2] - 2);
    double tz = fz - k;
    double c00 = at(i, j, k) * (1 - tx) + at(i + 1, j, k) * tx;
    double c10 = at(i, j + 1, k) * (1 - tx) + at(i + 1, j + 1, k) * tx;
    double c01 = at(i, j, k + 1) * (1 - tx) + at(i + 1, j, k + 1) * tx;
    double c11 = at(i, j + 1, k + 1) * (1 - tx) + at(i + 1, j + 1, k + 1) * tx;
    double c0 = c00 * (1 - ty) + c10 * ty;
    double c1 = c01 * (1 - ty) + c11 * ty;
    return c0 * (1 - tz) + c1 * tz;
}

namespace {

// Cubic Lagrange weights at nodes {-1, 0, 1, 2} for t in [0, 1].
inline void cubic_weights(double t, double w[4]) {
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

}  // namespace

double GridField::interpolate_cubic(const Point& x) const {
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    double fx = (x[0] - origin[0]) / h;
    double fy = (x[1] - origin[1]) / h;
    int i = clampi(static_cast<int>(std::floor(fx)), 1, shape[0] - 3);
    int j = clampi(static_cast<int>(std::floor(fy)), 1, shape[1] - 3);
    double wx[4], wy[4];
    cubic_weights(fx - i, wx);
    cubic_weights(fy - j, wy);
    if (dim == 2) {
        double acc = 0.0;
        for (int b = 0; b < 4; ++b) {
            double row = 0.0;
            for (int a = 0; a < 4; ++a) row += wx[a] * at(i - 1 + a, j - 1 + b);
            acc += wy[b] * row;
        }
        return acc;
    }
    double fz = (x[2] - origin[2]) / h;
    int k = clampi(static_cast<int>(std::floor(fz)), 1, shape[2] - 3);
    double wz[4];
    cubic_weights(fz - k, wz);
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
        double plane = 0.0;
        for (int b = 0; b < 4; ++b) {
            double row = 0.0;
            for (int a = 0; a < 4; ++a) row += wx[a] * at(i - 1 + a, j - 1 + b, k - 1 + c);
            plane += wy[b] * row;
        }
        acc += wz[c] * plane;
    }
    return acc;
}

namespace {
std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace

void write_grid(const GridField& g, const std::string& path) {
    ordered_json h;
    h["dims"] = g.dim;
    h["shape"] = g.dim == 2 ? ordered_json::array({g.shape[0], g.shape[1]})
                            : ordered_json::array({g.shape[0], g.shape[1], g.shape[2]});
    h["h"] = g.h;
    h["origin"] = g.dim == 2 ? ordered_json::array({g.origin[0], g.origin[1]})
                             : ordered_json::array({g.origin[0], g.origin[1], g.origin[2]});
    h["kind"] = "float64-le";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_grid: cannot open " + path);
    os << h.dump() << "\n";
    static_assert(std::endian::native == std::endian::little,
                  "raster writer assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(g.v.data()),
             static_cast<std::streamsize>(g.v.size() * sizeof(double)));
    if (!os) throw IoError("write_grid: short write to " + path);
}

GridField read_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("read_grid: cannot open " + path);
    std::string header;
    std::getline(is, header);
    ordered_json h = ordered_json::parse(header);
    GridField g;
    g.dim = h.at("dims").get<int>();
    auto sh = h.at("shape");
    g.shape = {sh[0].get<int>(), sh[1].get<int>(), g.dim == 3 ? sh[2].get<int>() : 1};
    g.h = h.at("h").get<double>();
    auto og = h.at("origin");
    g.origin = {og[0].get<double>(), og[1].get<double>(), g.dim == 3 ? og[2].get<double>() : 0.0};
    std::size_t n = static_cast<std::size_t>(g.shape[0]) * static_cast<std::size_t>(g.shape[1]) *
                    static_cast<std::size_t>(g.shape[2]);
    g.v.resize(n);
    is.read(reinterpret_cast<char*>(g.v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != n * sizeof(double))
        throw IoError("read_grid: truncated raster in " + path);
    return g;
}

void write_csv(const GridField& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_csv: cannot open " + path);
    os << (g.dim == 2 ? "x,y,value\n" : "x,y,z,value\n");
    for (int k = 0; k < g.shape[2]; ++k) {
        for (int j = 0; j < g.shape[1]; ++j) {
            for (int i = 0; i < g.shape[0]; ++i) {
                Point x = g.coord(i, j, k);
                for (double c : x) os << fmt_double(c) << ",";
                os << fmt_double(g.at(i, j, k)) << "\n";
            }
        }
    }
}

}  // namespace oblab::grid
