#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"

namespace fraclab {

/// Finite Delone point family with an acceleration index for nearest-point
/// queries. Lattice-derived generators also record the integer index of each
/// point; shift/translation identities for the stochastic module are checked
/// in that index space, where they are exact.
class PointSet {
public:
    int dim = 2;
    std::vector<Point> points;
    std::vector<int> labels;
    std::vector<std::array<std::int64_t, 3>> lattice;  // empty when not lattice-derived

    std::size_t size() const { return points.size(); }

    /// Label of a nearest point; ties broken by the smallest label.
    int nearest_label(const Point& x) const;
    /// Position (storage index) of that nearest point.
    int nearest_position(const Point& x) const;
    /// Distance from x to the nearest point.
    double nearest_distance(const Point& x) const;
    /// Exact minimum pairwise distance.
    double min_gap() const;

    void invalidate_index() { index_.reset(); }

    struct BucketIndex;

private:
    mutable std::shared_ptr<BucketIndex> index_;
    const BucketIndex& index() const;
};

struct DeloneCertificate {
    double r_packing = 0.0;
    double R_covering = 0.0;
    double probe_spacing = 0.0;
};

struct IndexSets {
    std::vector<int> interior;
    std::vector<int> boundary;
    double cell_sample_resolution = 0.0;
};

/// Half the minimum pairwise distance. Exact.
double packing_radius(const PointSet& ps);

/// Max over a probe grid in `region` of the distance to the point set;
/// under-approximates the covering radius with error <= probe_spacing*sqrt(n)/2.
double covering_radius(const PointSet& ps, const Domain& region, double probe_spacing);

/// Nearest-point label with smallest-label tie break.
int voronoi_index(const PointSet& ps, const Point& x);

DeloneCertificate delone_certificate(const PointSet& ps, const Domain& region,
                                     double probe_spacing);

/// Interior/boundary label sets of the Voronoi tessellation relative to A,
/// decided by sampling each cell at resolution sample_res (<= r_packing/4).
IndexSets index_sets(const PointSet& ps, const Domain& A, const DeloneCertificate& cert,
                     double sample_res);

struct CountingReport {
    double interior_lhs = 0.0, interior_rhs = 0.0;
    double boundary_lhs = 0.0, boundary_rhs = 0.0;
    double leftover_lhs = 0.0, leftover_rhs = 0.0;
    std::vector<std::int64_t> shell_max_counts;  // max over base points, per shell m
    double shell_c_fit = 0.0;                    // max_m max_i count / m^{n-1}
    double shell_growth_exponent = 0.0;          // fitted log-log slope of counts vs m
    bool interior_ok = false, boundary_ok = false, leftover_ok = false, shell_ok = false;
    bool pass = false;
    std::string failure;  // names the first violated inequality
};

/// Verifies the Voronoi counting bounds and the shell-count growth for the
/// tessellation of ps relative to A. shell_width <= 0 selects cert.r_packing.
CountingReport counting_check(const PointSet& ps, const Domain& A, const IndexSets& idx,
                              const DeloneCertificate& cert, double shell_width = 0.0,
                              int shell_m_max = 20);

/// Built-in diffeomorphism: linear shear plus a Gaussian radial push,
///   Phi(x) = S x + amp * exp(-|x-c|^2 / width^2) (x - c),
/// with declared bounds |grad Phi| <= M and det grad Phi >= nu checked by
/// sampling at generation time.
struct Diffeomorphism {
    double shear = 0.0;
    double amp = 0.0;
    Point center{0.5, 0.5, 0.0};
    double width = 0.35;
    double bound_M = 2.0;
    double bound_nu = 0.5;

    bool is_identity() const { return shear == 0.0 && amp == 0.0; }
    Point apply(const Point& x, int dim) const;
    void jacobian(const Point& x, int dim, double J[9]) const;
    double det_jacobian(const Point& x, int dim) const;
    /// Newton inversion using the analytic Jacobian.
    Point inverse(const Point& y, int dim, double tol = 1e-12) const;
    void validate(int dim, const BBox& sample_box) const;
};

struct GeneratorSpec {
    enum class Kind { Cubic, Rescaled, DiffeoOutside, DiffeoInside };
    Kind kind = Kind::Cubic;
    int dim = 2;
    double epsilon = 0.125;
    BBox box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2};
    double margin = -1.0;     // < 0: automatic, at least the covering radius
    double base_jitter = 0.3; // Rescaled: sup-norm jitter of the unit base lattice, < 1/2
    Diffeomorphism phi;       // Diffeo kinds
};

/// Deterministic point-set generation; covers spec.box with the requested
/// margin. Lattice indices are recorded for all kinds.
PointSet generate(const GeneratorSpec& spec, std::uint64_t seed);

struct EmpiricalLimitData {
    double r_user = 0.0;
    double theta_hat = 0.0;      // interior-index convention
    double theta_hat_all = 0.0;  // all points inside U
    std::int64_t n_interior = 0;
    std::int64_t n_all_in_u = 0;
    double count_discrepancy = 0.0;  // (n_all - n_interior) / max(1, n_interior)
    // histogram of the normalized counting measure (interior points)
    BBox hist_box;
    std::array<std::int64_t, 3> hist_shape{1, 1, 1};
    std::array<double, 3> hist_cell{0.0, 0.0, 0.0};
    std::vector<double> beta;      // density per histogram cell, integrates to 1
    std::vector<double> beta_all;  // same from the all-points measure
    std::string warning;

    std::int64_t hist_size() const {
        std::int64_t n = 1;
        for (int d = 0; d < hist_box.dim; ++d) n *= hist_shape[d];
        return n;
    }
    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < hist_box.dim; ++d) v *= hist_cell[d];
        return v;
    }
};

/// theta and beta estimators per the limit-density and limit-distribution
/// hypotheses; r_user must satisfy 0 < r_user <= packing_radius(ps).
EmpiricalLimitData estimate_limit_data(const PointSet& ps, const Domain& U, double r_user,
                                       double hist_cell);

/// Normalized det(grad Phi^{-1}) sampled at histogram cell centers (the limit
/// density of the outside-composed diffeomorphism generator).
std::vector<double> beta_reference_diffeo_outside(const Diffeomorphism& phi,
                                                  const EmpiricalLimitData& layout);

/// L1(U) distance between the histogram estimate and a reference density.
double beta_l1_error(const EmpiricalLimitData& data, const std::vector<double>& reference);

}  // namespace fraclab
