#pragma once

#include <vector>

#include "fraclab/common.hpp"

namespace fraclab {

/// Bounded computational domain U: an axis-aligned box (any dim) or a convex
/// polygon (2d). Curved or non-convex domains are out of scope.
class Domain {
public:
    enum class Kind { Rect, Polygon, Ball };

    static Domain rect(const Point& lo, const Point& hi, int dim = 2);
    /// Convex polygon, vertices in counter-clockwise order.
    static Domain polygon(std::vector<std::array<double, 2>> verts);
    static Domain ball(const Point& center, double radius, int dim = 2);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    BBox bbox() const;

    bool contains(const Point& p) const;
    /// Distance from p to the boundary of the domain (0 on the boundary),
    /// measured for points inside or outside.
    double boundary_distance(const Point& p) const;
    double measure() const;
    /// Lebesgue measure of the open delta-neighborhood of the boundary,
    /// {x : dist(x, dU) < delta}. Exact for boxes and convex polygons.
    double boundary_neighborhood_measure(double delta) const;

private:
    Kind kind_ = Kind::Rect;
    int dim_ = 2;
    Point lo_{}, hi_{};
    std::vector<std::array<double, 2>> verts_;
    Point center_{};
    double radius_ = 0.0;

    double polygon_area(const std::vector<std::array<double, 2>>& v) const;
    std::vector<std::array<double, 2>> eroded_polygon(double delta) const;
};

}  // namespace fraclab
