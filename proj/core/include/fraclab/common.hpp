#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fraclab {

/// Error with a module tag so CLI failures can name the subsystem.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

using Point = std::array<double, 3>;

inline double dist2(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

inline double dist(const Point& a, const Point& b, int dim) { return std::sqrt(dist2(a, b, dim)); }

inline double dist_inf(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s = std::max(s, std::abs(a[d] - b[d]));
    return s;
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

struct BBox {
    Point lo{};
    Point hi{};
    int dim = 2;

    double extent(int d) const { return hi[d] - lo[d]; }
    double volume() const {
        double v = 1.0;
        for (int d = 0; d < dim; ++d) v *= extent(d);
        return v;
    }
    bool contains(const Point& p) const {
        for (int d = 0; d < dim; ++d)
            if (p[d] < lo[d] || p[d] > hi[d]) return false;
        return true;
    }
    BBox expanded(double margin) const {
        BBox b = *this;
        for (int d = 0; d < dim; ++d) {
            b.lo[d] -= margin;
            b.hi[d] += margin;
        }
        return b;
    }
};

}  // namespace fraclab
