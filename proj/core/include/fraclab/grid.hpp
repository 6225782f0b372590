#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"

namespace fraclab {

using NodeMask = std::vector<std::uint8_t>;

/// Uniform cell-centered grid over an axis-aligned box. Node (i0,i1[,i2]) sits
/// at lo + (i+1/2)h; a node owns the h-cube centered on it.
struct UniformGrid {
    int dim = 2;
    std::array<std::int64_t, 3> shape{1, 1, 1};
    Point lo{};
    double h = 0.0;

    static UniformGrid over(const BBox& box, std::int64_t nodes_per_axis0);

    std::int64_t size() const {
        std::int64_t n = 1;
        for (int d = 0; d < dim; ++d) n *= shape[d];
        return n;
    }
    std::int64_t index(std::int64_t i0, std::int64_t i1, std::int64_t i2 = 0) const {
        return dim == 2 ? i1 * shape[0] + i0 : (i2 * shape[1] + i1) * shape[0] + i0;
    }
    void unravel(std::int64_t idx, std::int64_t& i0, std::int64_t& i1, std::int64_t& i2) const {
        i0 = idx % shape[0];
        idx /= shape[0];
        i1 = dim == 2 ? idx : idx % shape[1];
        i2 = dim == 2 ? 0 : idx / shape[1];
    }
    Point node(std::int64_t idx) const {
        std::int64_t i0, i1, i2;
        unravel(idx, i0, i1, i2);
        Point p{};
        p[0] = lo[0] + (static_cast<double>(i0) + 0.5) * h;
        p[1] = lo[1] + (static_cast<double>(i1) + 0.5) * h;
        if (dim == 3) p[2] = lo[2] + (static_cast<double>(i2) + 0.5) * h;
        return p;
    }
    BBox box() const {
        BBox b;
        b.dim = dim;
        b.lo = lo;
        for (int d = 0; d < dim; ++d) b.hi[d] = lo[d] + static_cast<double>(shape[d]) * h;
        return b;
    }
    double cell_volume() const { return std::pow(h, dim); }
    bool same_layout(const UniformGrid& o) const {
        return dim == o.dim && shape == o.shape && lo == o.lo && h == o.h;
    }
};

/// Nodal scalar values on a grid. With exterior_zero set, the function is
/// understood to vanish identically outside the declared support mask.
struct ScalarField {
    UniformGrid grid;
    std::vector<double> values;
    bool exterior_zero = true;

    static ScalarField zeros(const UniformGrid& g) {
        ScalarField f;
        f.grid = g;
        f.values.assign(g.size(), 0.0);
        return f;
    }
    double& operator[](std::int64_t i) { return values[i]; }
    double operator[](std::int64_t i) const { return values[i]; }
};

/// Bilinear (2d) / trilinear (3d) interpolation; clamps to the grid box and
/// returns 0 outside it when the field carries the exterior-zero convention.
double interpolate(const ScalarField& f, const Point& p);

NodeMask mask_all(const UniformGrid& g);
NodeMask mask_in_domain(const UniformGrid& g, const Domain& U);
/// Nodes of U whose distance to dU is at most width*h (the constrained band
/// realizing the zero boundary condition).
NodeMask mask_boundary_collar(const UniformGrid& g, const Domain& U, int width);
NodeMask mask_ball(const UniformGrid& g, const Point& center, double radius);
NodeMask mask_and_not(const NodeMask& a, const NodeMask& b);
NodeMask mask_or(const NodeMask& a, const NodeMask& b);
std::int64_t mask_count(const NodeMask& m);
std::vector<std::int64_t> mask_indices(const NodeMask& m);

/// Flat binary field format: magic, dims, spacing, bbox origin, row-major
/// payload. Bit-exact round trip.
void write_field_binary(const ScalarField& f, const std::string& path);
ScalarField read_field_binary(const std::string& path);
/// CSV (index coordinates and value) for small grids.
void write_field_csv(const ScalarField& f, const std::string& path);

}  // namespace fraclab
