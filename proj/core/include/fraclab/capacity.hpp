#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fraclab/solver.hpp"

namespace fraclab {

/// Compact obstacle template T, always contained in the declared truncation
/// ball. Shapes are analytic except NodeMask, which ties T to a grid.
struct CompactSetSpec {
    enum class Shape { Ball, Box, TwoBalls, NodeMask };
    Shape shape = Shape::Ball;
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;            // Ball / TwoBalls first ball
    Point half_widths{1.0, 1.0, 1.0};  // Box
    Point center2{0.0, 0.0, 0.0};   // TwoBalls
    double radius2 = 0.0;
    std::shared_ptr<const NodeMask> node_mask;  // Shape::NodeMask (grid-tied)
    double scale = 1.0;             // homothety about `center`

    static CompactSetSpec ball(double r, const Point& c = {}) {
        CompactSetSpec t;
        t.shape = Shape::Ball;
        t.radius = r;
        t.center = c;
        return t;
    }
    static CompactSetSpec box(const Point& half_widths, const Point& c = {}) {
        CompactSetSpec t;
        t.shape = Shape::Box;
        t.half_widths = half_widths;
        t.center = c;
        return t;
    }
    static CompactSetSpec two_balls(double r1, const Point& c1, double r2, const Point& c2) {
        CompactSetSpec t;
        t.shape = Shape::TwoBalls;
        t.radius = r1;
        t.center = c1;
        t.radius2 = r2;
        t.center2 = c2;
        return t;
    }

    bool contains(const Point& p, int dim) const;
    /// Radius of a ball about `center` containing the (scaled) set.
    double outer_radius(int dim) const;
    CompactSetSpec scaled(double s) const {
        CompactSetSpec t = *this;
        t.scale *= s;
        return t;
    }
    bool empty() const;
};

/// One capacity problem on the computational box [-L, L]^n:
///   annulus = false: C(T, B_r)       (support in B_r, energy over the full
///                                     padded grid, exterior zeros included)
///   annulus = true:  cap(T, B_R; r)  (support in B_r, energy window B_R x B_R)
struct CapacityProblem {
    CompactSetSpec T;
    double r_support = 2.0;
    double R_energy = 2.0;  // >= r_support; only used by the annulus variant
    Point support_center{0.0, 0.0, 0.0};
    Point box_center{0.0, 0.0, 0.0};  // computational box center
    bool annulus = false;
    FractionalKernel kernel;
    std::int64_t resolution = 128;  // nodes per axis
    double box_pad = 1.5;           // L = box_pad * max(r_support, R_energy)
    double cg_tol = 1e-9;
    double pg_tol = 1e-10;
    int max_iterations = 50000;
    bool use_projected_gradient = false;  // general p, or a p = 2 cross-check
};

struct CapacityResult {
    double value = 0.0;
    ScalarField potential;
    int iterations = 0;
    double residual = 0.0;
    NodeMask obstacle_mask;
    NodeMask support_mask;
    NodeMask window_mask;
};

CapacityResult solve_capacity(const CapacityProblem& prob);

struct OrderingReport {
    bool pass = false;
    double worst_order_violation = 0.0;  // max(u^T - u^F)
    double worst_box_violation = 0.0;    // distance outside [0, 1]
    std::int64_t worst_node = -1;
    std::string failure;
};

/// Lemma-ordering check 0 <= u^T <= u^F <= 1 for T inside F, at tolerance 1e-8.
OrderingReport potential_ordering_check(const CompactSetSpec& T, const CompactSetSpec& F,
                                        const CapacityProblem& params);

struct CapacityTableRow {
    double r = 0.0;
    double R = 0.0;
    double value_truncated = 0.0;  // C(T, B_r)
    double value_annulus = 0.0;    // cap(T, B_R; r)
    int iterations = 0;
    double residual = 0.0;
};

struct CapacityTable {
    std::vector<CapacityTableRow> rows;
    double cap_estimate = 0.0;  // C(T, B_{r_max}), the truncation proxy for cap(T)
    double cauchy_gap = 0.0;    // last successive decrement of C(T, B_r)
    double annulus_c_fit = 0.0; // fitted constant in the annulus inequality
    bool monotone = false;
    bool cauchy_trend = false;
    bool annulus_ordering = false;  // cap(T,B_R;r) <= C(T,B_r)
    std::string note;
};

/// Sweep of truncated and annulus capacities on one master grid (so the
/// feasible sets are nested and monotonicity is structural). The r = R
/// configuration is reported, never asserted.
CapacityTable capacity_limit_table(const CompactSetSpec& T, const std::vector<double>& r_list,
                                   double R_ratio, const FractionalKernel& kernel,
                                   std::int64_t resolution, double cg_tol = 1e-9);

struct DefectDecayReport {
    std::vector<double> R_list;
    std::vector<double> defects;  // D(xi_r, B_R x B_R^c)
    double capacity_value = 0.0;
    bool decreasing = false;
    bool tail_small = false;  // final defect <= 5% of the capacity value
};

/// Locality-defect decay of the truncated capacitary potential.
DefectDecayReport locality_defect_decay_check(const CompactSetSpec& T, double r,
                                              const std::vector<double>& R_list,
                                              const FractionalKernel& kernel,
                                              std::int64_t resolution);

/// Node mask of T on a grid; requires T to contain at least one full grid
/// cell ("obstacle under-resolved" otherwise unless allow_unresolved).
NodeMask obstacle_mask(const CompactSetSpec& T, const UniformGrid& g,
                       bool allow_unresolved = false);

}  // namespace fraclab
