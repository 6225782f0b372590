#include "fraclab/domain.hpp"

#include <algorithm>
#include <cmath>

namespace fraclab {

Domain Domain::rect(const Point& lo, const Point& hi, int dim) {
    Domain d;
    d.kind_ = Kind::Rect;
    d.dim_ = dim;
    d.lo_ = lo;
    d.hi_ = hi;
    for (int k = 0; k < dim; ++k)
        if (!(hi[k] > lo[k])) throw Error("domain", "rectangle has empty interior");
    return d;
}

Domain Domain::polygon(std::vector<std::array<double, 2>> verts) {
    Domain d;
    d.kind_ = Kind::Polygon;
    d.dim_ = 2;
    d.verts_ = std::move(verts);
    if (d.verts_.size() < 3) throw Error("domain", "polygon needs >= 3 vertices");
    if (d.polygon_area(d.verts_) <= 0.0)
        throw Error("domain", "polygon vertices must be counter-clockwise and non-degenerate");
    // Convexity: every cross product of consecutive edges non-negative.
    const std::size_t n = d.verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = d.verts_[i];
        const auto& b = d.verts_[(i + 1) % n];
        const auto& c = d.verts_[(i + 2) % n];
        const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cross < 0.0) throw Error("domain", "only convex polygons are supported");
    }
    return d;
}

Domain Domain::ball(const Point& center, double radius, int dim) {
    if (!(radius > 0.0)) throw Error("domain", "ball needs positive radius");
    Domain d;
    d.kind_ = Kind::Ball;
    d.dim_ = dim;
    d.center_ = center;
    d.radius_ = radius;
    return d;
}

BBox Domain::bbox() const {
    BBox b;
    b.dim = dim_;
    if (kind_ == Kind::Rect) {
        b.lo = lo_;
        b.hi = hi_;
    } else if (kind_ == Kind::Ball) {
        for (int d = 0; d < dim_; ++d) {
            b.lo[d] = center_[d] - radius_;
            b.hi[d] = center_[d] + radius_;
        }
    } else {
        b.lo = {verts_[0][0], verts_[0][1], 0.0};
        b.hi = b.lo;
        for (const auto& v : verts_) {
            b.lo[0] = std::min(b.lo[0], v[0]);
            b.lo[1] = std::min(b.lo[1], v[1]);
            b.hi[0] = std::max(b.hi[0], v[0]);
            b.hi[1] = std::max(b.hi[1], v[1]);
        }
    }
    return b;
}

bool Domain::contains(const Point& p) const {
    if (kind_ == Kind::Rect) {
        for (int d = 0; d < dim_; ++d)
            if (p[d] <= lo_[d] || p[d] >= hi_[d]) return false;
        return true;
    }
    if (kind_ == Kind::Ball) return dist2(p, center_, dim_) < radius_ * radius_;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = verts_[i];
        const auto& b = verts_[(i + 1) % n];
        const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if (cross <= 0.0) return false;
    }
    return true;
}

namespace {
double segment_distance(const std::array<double, 2>& a, const std::array<double, 2>& b,
                        const Point& p) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = p[0] - a[0], wy = p[1] - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}
}  // namespace

double Domain::boundary_distance(const Point& p) const {
    if (kind_ == Kind::Ball) return std::abs(radius_ - dist(p, center_, dim_));
    if (kind_ == Kind::Rect) {
        if (contains(p)) {
            double d = hi_[0] - lo_[0];
            for (int k = 0; k < dim_; ++k) d = std::min({d, p[k] - lo_[k], hi_[k] - p[k]});
            return d;
        }
        // Distance to the box (outside).
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double t = std::max({lo_[k] - p[k], 0.0, p[k] - hi_[k]});
            s += t * t;
        }
        return std::sqrt(s);
    }
    double d = segment_distance(verts_.back(), verts_.front(), p);
    for (std::size_t i = 0; i + 1 < verts_.size(); ++i)
        d = std::min(d, segment_distance(verts_[i], verts_[i + 1], p));
    return d;
}

double Domain::polygon_area(const std::vector<std::array<double, 2>>& v) const {
    double a = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

std::vector<std::array<double, 2>> Domain::eroded_polygon(double delta) const {
    // Clip against every edge moved inward by delta (half-plane intersection).
    std::vector<std::array<double, 2>> poly = verts_;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n && !poly.empty(); ++i) {
        const auto& a = verts_[i];
        const auto& b = verts_[(i + 1) % n];
        double nx = -(b[1] - a[1]), ny = b[0] - a[0];  // inward normal (CCW)
        const double len = std::sqrt(nx * nx + ny * ny);
        nx /= len;
        ny /= len;
        const double off = nx * a[0] + ny * a[1] + delta;  // keep nx*x + ny*y >= off
        std::vector<std::array<double, 2>> out;
        const std::size_t m = poly.size();
        for (std::size_t j = 0; j < m; ++j) {
            const auto& p = poly[j];
            const auto& q = poly[(j + 1) % m];
            const double dp = nx * p[0] + ny * p[1] - off;
            const double dq = nx * q[0] + ny * q[1] - off;
            if (dp >= 0.0) out.push_back(p);
            if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
                const double t = dp / (dp - dq);
                out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
            }
        }
        poly = std::move(out);
    }
    return poly;
}

double Domain::measure() const {
    if (kind_ == Kind::Rect) {
        double v = 1.0;
        for (int k = 0; k < dim_; ++k) v *= hi_[k] - lo_[k];
        return v;
    }
    if (kind_ == Kind::Ball) return unit_ball_volume(dim_) * std::pow(radius_, dim_);
    return polygon_area(verts_);
}

double Domain::boundary_neighborhood_measure(double delta) const {
    if (delta <= 0.0) return 0.0;
    if (kind_ == Kind::Ball) {
        const double wn = unit_ball_volume(dim_);
        const double outer = std::pow(radius_ + delta, dim_);
        const double inner = std::pow(std::max(0.0, radius_ - delta), dim_);
        return wn * (outer - inner);
    }
    if (kind_ == Kind::Rect) {
        double outer = 1.0, inner = 1.0;
        for (int k = 0; k < dim_; ++k) {
            outer *= hi_[k] - lo_[k] + 2.0 * delta;
            inner *= std::max(0.0, hi_[k] - lo_[k] - 2.0 * delta);
        }
        return outer - inner;
    }
    // Convex polygon: outer offset adds perimeter*delta + pi*delta^2,
    // inner region is the delta-eroded polygon.
    double perim = 0.0;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = verts_[i];
        const auto& b = verts_[(i + 1) % n];
        perim += std::hypot(b[0] - a[0], b[1] - a[1]);
    }
    const double outer = measure() + perim * delta + M_PI * delta * delta;
    const auto eroded = eroded_polygon(delta);
    const double inner = eroded.size() >= 3 ? polygon_area(eroded) : 0.0;
    return outer - inner;
}

}  // namespace fraclab
