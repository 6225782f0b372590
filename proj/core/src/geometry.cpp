#include "fraclab/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

// ---------------------------------------------------------------------------
// Nearest-point index: uniform buckets with ring expansion.
// ---------------------------------------------------------------------------

struct PointSet::BucketIndex {
    int dim;
    Point lo{}, hi{};
    double cell = 1.0;
    std::array<std::int64_t, 3> shape{1, 1, 1};
    std::vector<std::vector<int>> buckets;  // point ids per bucket

    std::int64_t bucket_of(const Point& p) const {
        std::int64_t b[3] = {0, 0, 0};
        for (int d = 0; d < dim; ++d) {
            auto i = static_cast<std::int64_t>(std::floor((p[d] - lo[d]) / cell));
            b[d] = std::clamp<std::int64_t>(i, 0, shape[d] - 1);
        }
        return (b[2] * shape[1] + b[1]) * shape[0] + b[0];
    }
};

const PointSet::BucketIndex& PointSet::index() const {
    if (index_) return *index_;
    auto idx = std::make_shared<BucketIndex>();
    idx->dim = dim;
    idx->lo = points.front();
    idx->hi = points.front();
    for (const auto& p : points)
        for (int d = 0; d < dim; ++d) {
            idx->lo[d] = std::min(idx->lo[d], p[d]);
            idx->hi[d] = std::max(idx->hi[d], p[d]);
        }
    double vol = 1.0, max_extent = 0.0;
    for (int d = 0; d < dim; ++d) {
        vol *= std::max(idx->hi[d] - idx->lo[d], 1e-12);
        max_extent = std::max(max_extent, idx->hi[d] - idx->lo[d]);
    }
    idx->cell = std::max({std::pow(vol / static_cast<double>(points.size()), 1.0 / dim),
                          max_extent / 512.0, 1e-12});
    // Cap the bucket count; sparse or degenerate clouds otherwise explode the
    // ring search.
    const std::int64_t max_buckets =
        std::max<std::int64_t>(1024, 8 * static_cast<std::int64_t>(points.size()));
    for (;;) {
        std::int64_t total = 1;
        for (int d = 0; d < dim; ++d) {
            idx->shape[d] = std::max<std::int64_t>(
                1,
                static_cast<std::int64_t>(std::ceil((idx->hi[d] - idx->lo[d]) / idx->cell)) + 1);
            total *= idx->shape[d];
        }
        if (total <= max_buckets) {
            idx->buckets.resize(total);
            break;
        }
        idx->cell *= 2.0;
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        idx->buckets[idx->bucket_of(points[i])].push_back(static_cast<int>(i));
    index_ = std::move(idx);
    return *index_;
}

namespace {

// Scans buckets in expanding L-inf rings until no closer point can exist.
// Returns the position index of the best point (ties: smallest label).
int ring_search(const PointSet& ps, const PointSet::BucketIndex& idx, const Point& x,
                int exclude = -1) {
    std::int64_t c[3] = {0, 0, 0};
    for (int d = 0; d < idx.dim; ++d) {
        auto i = static_cast<std::int64_t>(std::floor((x[d] - idx.lo[d]) / idx.cell));
        c[d] = std::clamp<std::int64_t>(i, 0, idx.shape[d] - 1);
    }
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto consider = [&](int pid) {
        if (pid == exclude) return;
        const double d2 = dist2(ps.points[pid], x, ps.dim);
        if (d2 < best_d2 ||
            (d2 == best_d2 && best >= 0 && ps.labels[pid] < ps.labels[best])) {
            best = pid;
            best_d2 = d2;
        }
    };
    // No bucket exists beyond this ring; iteration ranges are clamped so the
    // per-ring cost is proportional to the in-bounds shell only.
    std::int64_t ring_bound = 0;
    for (int d = 0; d < idx.dim; ++d)
        ring_bound = std::max(ring_bound, std::max(c[d], idx.shape[d] - 1 - c[d]));
    for (std::int64_t ring = 0; ring <= ring_bound; ++ring) {
        // Once a candidate exists, stop as soon as the next ring cannot beat it.
        if (best >= 0) {
            const double reach = static_cast<double>(ring - 1) * idx.cell;
            if (reach > 0.0 && reach * reach >= best_d2) break;
        }
        const std::int64_t z_lo = idx.dim == 3 ? std::max<std::int64_t>(0, c[2] - ring) : 0;
        const std::int64_t z_hi =
            idx.dim == 3 ? std::min(idx.shape[2] - 1, c[2] + ring) : 0;
        for (std::int64_t bz = z_lo; bz <= z_hi; ++bz) {
            for (std::int64_t by = std::max<std::int64_t>(0, c[1] - ring);
                 by <= std::min(idx.shape[1] - 1, c[1] + ring); ++by) {
                const std::int64_t ry = std::abs(by - c[1]);
                const std::int64_t rz = idx.dim == 3 ? std::abs(bz - c[2]) : 0;
                auto visit = [&](std::int64_t bx) {
                    if (bx < 0 || bx >= idx.shape[0]) return;
                    for (int pid : idx.buckets[(bz * idx.shape[1] + by) * idx.shape[0] + bx])
                        consider(pid);
                };
                if (std::max(ry, rz) == ring) {
                    // whole clamped row sits on the shell
                    for (std::int64_t bx = std::max<std::int64_t>(0, c[0] - ring);
                         bx <= std::min(idx.shape[0] - 1, c[0] + ring); ++bx)
                        visit(bx);
                } else {
                    visit(c[0] - ring);  // only the two shell ends
                    if (ring > 0) visit(c[0] + ring);
                }
            }
        }
    }
    return best;
}

}  // namespace

int PointSet::nearest_label(const Point& x) const {
    if (points.empty()) throw Error("delone_geometry", "empty point set");
    const int pid = ring_search(*this, index(), x);
    return labels[pid];
}

int PointSet::nearest_position(const Point& x) const {
    if (points.empty()) throw Error("delone_geometry", "empty point set");
    return ring_search(*this, index(), x);
}

double PointSet::nearest_distance(const Point& x) const {
    if (points.empty()) throw Error("delone_geometry", "empty point set");
    const int pid = ring_search(*this, index(), x);
    return dist(points[pid], x, dim);
}

double PointSet::min_gap() const {
    if (points.size() < 2) throw Error("delone_geometry", "degenerate set");
    const auto& idx = index();
    std::vector<double> per_point(points.size());
    parallel_for(0, static_cast<std::int64_t>(points.size()), [&](std::int64_t i) {
        const int other = ring_search(*this, idx, points[i], static_cast<int>(i));
        per_point[i] = dist(points[i], points[other], dim);
    });
    return *std::min_element(per_point.begin(), per_point.end());
}

// ---------------------------------------------------------------------------
// Certificate operations
// ---------------------------------------------------------------------------

double packing_radius(const PointSet& ps) {
    if (ps.size() < 2) throw Error("delone_geometry", "degenerate set: need >= 2 points");
    return 0.5 * ps.min_gap();
}

double covering_radius(const PointSet& ps, const Domain& region, double probe_spacing) {
    if (ps.points.empty()) throw Error("delone_geometry", "empty point set");
    if (!(probe_spacing > 0.0)) throw Error("delone_geometry", "probe spacing must be positive");
    const BBox box = region.bbox();
    std::array<std::int64_t, 3> n{1, 1, 1};
    for (int d = 0; d < region.dim(); ++d)
        n[d] = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                             std::ceil(box.extent(d) / probe_spacing)));
    const std::int64_t total = n[0] * n[1] * n[2];
    double best = 0.0;
    std::mutex best_mutex;
    parallel_for_chunks(0, total, [&](std::int64_t a, std::int64_t b) {
        double local = 0.0;
        for (std::int64_t t = a; t < b; ++t) {
            std::int64_t rem = t;
            Point p{};
            for (int d = 0; d < region.dim(); ++d) {
                const std::int64_t i = rem % n[d];
                rem /= n[d];
                p[d] = box.lo[d] + (static_cast<double>(i) + 0.5) *
                                       (box.extent(d) / static_cast<double>(n[d]));
            }
            if (!region.contains(p)) continue;
            local = std::max(local, ps.nearest_distance(p));
        }
        std::lock_guard<std::mutex> lock(best_mutex);  // max-reduction, order-free
        best = std::max(best, local);
    });
    return best;
}

int voronoi_index(const PointSet& ps, const Point& x) { return ps.nearest_label(x); }

DeloneCertificate delone_certificate(const PointSet& ps, const Domain& region,
                                     double probe_spacing) {
    DeloneCertificate c;
    c.r_packing = packing_radius(ps);
    if (probe_spacing <= 0.0) probe_spacing = c.r_packing / 8.0;
    c.R_covering = covering_radius(ps, region, probe_spacing);
    c.probe_spacing = probe_spacing;
    if (!(c.r_packing > 0.0)) throw Error("delone_geometry", "coincident points");
    return c;
}

// ---------------------------------------------------------------------------
// Index sets and counting bounds
// ---------------------------------------------------------------------------

namespace {

struct CellFlags {
    std::uint8_t has_in = 0, has_out = 0, near_bnd = 0;
};

}  // namespace

IndexSets index_sets(const PointSet& ps, const Domain& A, const DeloneCertificate& cert,
                     double sample_res) {
    if (!(sample_res > 0.0) || sample_res > cert.r_packing / 4.0 + 1e-15)
        throw Error("delone_geometry",
                    "sample resolution too coarse: need sample_res <= r_packing / 4");
    // Sampling window: around A, but clipped to the declared point window
    // (cells of a finite family are read as clipped at one covering radius
    // beyond the outermost points).
    BBox ext = A.bbox().expanded(2.0 * cert.R_covering + 2.0 * sample_res);
    {
        BBox pbox{ps.points.front(), ps.points.front(), ps.dim};
        for (const auto& p : ps.points)
            for (int d = 0; d < ps.dim; ++d) {
                pbox.lo[d] = std::min(pbox.lo[d], p[d]);
                pbox.hi[d] = std::max(pbox.hi[d], p[d]);
            }
        for (int d = 0; d < ps.dim; ++d) {
            ext.lo[d] = std::max(ext.lo[d], pbox.lo[d] - cert.R_covering - 2.0 * sample_res);
            ext.hi[d] = std::min(ext.hi[d], pbox.hi[d] + cert.R_covering + 2.0 * sample_res);
        }
    }
    std::array<std::int64_t, 3> n{1, 1, 1};
    std::array<double, 3> step{0.0, 0.0, 0.0};
    for (int d = 0; d < ps.dim; ++d) {
        n[d] = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::ceil(ext.extent(d) / sample_res)));
        step[d] = ext.extent(d) / static_cast<double>(n[d]);
    }
    const std::int64_t total = n[0] * n[1] * n[2];
    std::vector<CellFlags> flags(ps.size());
    std::mutex merge_mutex;
    parallel_for_chunks(0, total, [&](std::int64_t a, std::int64_t b) {
        std::vector<CellFlags> local(ps.size());
        for (std::int64_t t = a; t < b; ++t) {
            std::int64_t rem = t;
            Point p{};
            for (int d = 0; d < ps.dim; ++d) {
                const std::int64_t i = rem % n[d];
                rem /= n[d];
                p[d] = ext.lo[d] + (static_cast<double>(i) + 0.5) * step[d];
            }
            CellFlags& f = local[ps.nearest_position(p)];
            if (A.contains(p)) f.has_in = 1;
            else f.has_out = 1;
            if (A.boundary_distance(p) <= sample_res) f.near_bnd = 1;
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (std::size_t i = 0; i < flags.size(); ++i) {
            flags[i].has_in |= local[i].has_in;
            flags[i].has_out |= local[i].has_out;
            flags[i].near_bnd |= local[i].near_bnd;
        }
    });
    IndexSets out;
    out.cell_sample_resolution = sample_res;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const CellFlags& f = flags[i];
        const bool boundary = (f.has_in && f.has_out) || f.near_bnd;
        if (boundary)
            out.boundary.push_back(ps.labels[i]);
        else if (f.has_in)
            out.interior.push_back(ps.labels[i]);
    }
    std::sort(out.interior.begin(), out.interior.end());
    std::sort(out.boundary.begin(), out.boundary.end());
    return out;
}

CountingReport counting_check(const PointSet& ps, const Domain& A, const IndexSets& idx,
                              const DeloneCertificate& cert, double shell_width,
                              int shell_m_max) {
    CountingReport rep;
    const int n = ps.dim;
    const double wn = unit_ball_volume(n);
    const double rpn = std::pow(cert.r_packing, n);
    rep.interior_lhs = wn * rpn * static_cast<double>(idx.interior.size());
    rep.interior_rhs = A.measure();
    rep.boundary_lhs = wn * rpn * static_cast<double>(idx.boundary.size());
    rep.boundary_rhs = A.boundary_neighborhood_measure(cert.R_covering);
    rep.leftover_rhs = rep.boundary_rhs;

    // Position-indexed interior membership (labels may be arbitrary ints).
    std::vector<std::uint8_t> is_interior(ps.size(), 0);
    {
        std::vector<int> sorted = idx.interior;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (std::binary_search(sorted.begin(), sorted.end(), ps.labels[i]))
                is_interior[i] = 1;
    }

    // Leftover measure by sampling A at the index-set resolution.
    {
        const double res = idx.cell_sample_resolution > 0.0 ? idx.cell_sample_resolution
                                                            : cert.r_packing / 4.0;
        const BBox box = A.bbox();
        std::array<std::int64_t, 3> m{1, 1, 1};
        std::array<double, 3> step{0.0, 0.0, 0.0};
        for (int d = 0; d < n; ++d) {
            m[d] = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::ceil(box.extent(d) / res)));
            step[d] = box.extent(d) / static_cast<double>(m[d]);
        }
        const std::int64_t total = m[0] * m[1] * m[2];
        std::vector<std::int64_t> leftover_counts(64, 0);
        std::mutex mu;
        parallel_for_chunks(0, total, [&](std::int64_t a, std::int64_t b) {
            std::int64_t local = 0;
            for (std::int64_t t = a; t < b; ++t) {
                std::int64_t rem = t;
                Point p{};
                for (int d = 0; d < n; ++d) {
                    const std::int64_t i = rem % m[d];
                    rem /= m[d];
                    p[d] = box.lo[d] + (static_cast<double>(i) + 0.5) * step[d];
                }
                if (!A.contains(p)) continue;
                if (!is_interior[ps.nearest_position(p)]) ++local;
            }
            std::lock_guard<std::mutex> lock(mu);
            leftover_counts[0] += local;
        });
        double cellv = 1.0;
        for (int d = 0; d < n; ++d) cellv *= step[d];
        rep.leftover_lhs = cellv * static_cast<double>(leftover_counts[0]);
    }

    // Shell counts around every base point, k restricted to interior labels.
    const double w = shell_width > 0.0 ? shell_width : cert.r_packing;
    rep.shell_max_counts.assign(shell_m_max, 0);
    std::vector<std::int64_t> per_m(shell_m_max, 0);
    std::mutex shell_mutex;
    parallel_for_chunks(0, static_cast<std::int64_t>(ps.size()), [&](std::int64_t a,
                                                                     std::int64_t b) {
        std::vector<std::int64_t> counts(shell_m_max);
        std::vector<std::int64_t> local_max(shell_m_max, 0);
        for (std::int64_t i = a; i < b; ++i) {
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t k = 0; k < ps.size(); ++k) {
                if (!is_interior[k] || static_cast<std::int64_t>(k) == i) continue;
                const double d = dist_inf(ps.points[i], ps.points[k], n);
                // shells m w < d <= (m+1) w, m = 1 .. shell_m_max
                const auto m = static_cast<std::int64_t>(std::ceil(d / w)) - 1;
                if (m >= 1 && m <= shell_m_max && d > static_cast<double>(m) * w)
                    ++counts[m - 1];
            }
            for (int m = 0; m < shell_m_max; ++m)
                local_max[m] = std::max(local_max[m], counts[m]);
        }
        std::lock_guard<std::mutex> lock(shell_mutex);
        for (int m = 0; m < shell_m_max; ++m) per_m[m] = std::max(per_m[m], local_max[m]);
    });
    rep.shell_c_fit = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (int m = 1; m <= shell_m_max; ++m) {
        rep.shell_max_counts[m - 1] = per_m[m - 1];
        if (per_m[m - 1] <= 0) continue;
        rep.shell_c_fit = std::max(
            rep.shell_c_fit, static_cast<double>(per_m[m - 1]) / std::pow(m, n - 1));
        const double x = std::log(static_cast<double>(m));
        const double y = std::log(static_cast<double>(per_m[m - 1]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    rep.shell_growth_exponent =
        pts >= 2 ? (pts * sxy - sx * sy) / (pts * sxx - sx * sx) : 0.0;

    rep.interior_ok = rep.interior_lhs <= rep.interior_rhs * (1.0 + 1e-12);
    rep.boundary_ok = rep.boundary_lhs <= rep.boundary_rhs * (1.0 + 1e-12);
    rep.leftover_ok = rep.leftover_lhs <= rep.leftover_rhs * (1.0 + 1e-12);
    rep.shell_ok = pts < 2 || rep.shell_growth_exponent <= static_cast<double>(n - 1) + 0.5;
    rep.pass = rep.interior_ok && rep.boundary_ok && rep.leftover_ok && rep.shell_ok;
    if (!rep.interior_ok)
        rep.failure = "interior count bound omega_n r^n #I <= L^n(A)";
    else if (!rep.boundary_ok)
        rep.failure = "boundary count bound omega_n r^n #B <= L^n((dA)_R)";
    else if (!rep.leftover_ok)
        rep.failure = "leftover measure bound L^n(A \\ union V^i) <= L^n((dA)_R)";
    else if (!rep.shell_ok)
        rep.failure = "shell count growth exceeds m^{n-1}";
    return rep;
}

// ---------------------------------------------------------------------------
// Diffeomorphism
// ---------------------------------------------------------------------------

Point Diffeomorphism::apply(const Point& x, int dim) const {
    Point y{};
    y[0] = x[0] + shear * x[1];
    y[1] = x[1];
    if (dim == 3) y[2] = x[2];
    if (amp != 0.0) {
        const double q = dist2(x, center, dim);
        const double g = std::exp(-q / (width * width));
        for (int d = 0; d < dim; ++d) y[d] += amp * g * (x[d] - center[d]);
    }
    return y;
}

void Diffeomorphism::jacobian(const Point& x, int dim, double J[9]) const {
    for (int i = 0; i < 9; ++i) J[i] = 0.0;
    J[0] = 1.0;
    J[1] = shear;
    J[3 * 1 + 1] = 1.0;
    if (dim == 3) J[3 * 2 + 2] = 1.0;
    if (amp != 0.0) {
        const double w2 = width * width;
        const double q = dist2(x, center, dim);
        const double g = std::exp(-q / w2);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double xi = x[i] - center[i];
                const double xj = x[j] - center[j];
                J[3 * i + j] += amp * g * ((i == j ? 1.0 : 0.0) - 2.0 * xi * xj / w2);
            }
    }
}

double Diffeomorphism::det_jacobian(const Point& x, int dim) const {
    double J[9];
    jacobian(x, dim, J);
    if (dim == 2) return J[0] * J[4] - J[1] * J[3];
    return J[0] * (J[4] * J[8] - J[5] * J[7]) - J[1] * (J[3] * J[8] - J[5] * J[6]) +
           J[2] * (J[3] * J[7] - J[4] * J[6]);
}

Point Diffeomorphism::inverse(const Point& y, int dim, double tol) const {
    Point x = y;  // the map is a bounded perturbation of a shear
    x[0] = y[0] - shear * y[1];
    for (int it = 0; it < 100; ++it) {
        const Point fx = apply(x, dim);
        Point r{};
        double rn = 0.0;
        for (int d = 0; d < dim; ++d) {
            r[d] = fx[d] - y[d];
            rn = std::max(rn, std::abs(r[d]));
        }
        if (rn < tol) return x;
        double J[9];
        jacobian(x, dim, J);
        if (dim == 2) {
            const double det = J[0] * J[4] - J[1] * J[3];
            const double dx0 = (J[4] * r[0] - J[1] * r[1]) / det;
            const double dx1 = (-J[3] * r[0] + J[0] * r[1]) / det;
            x[0] -= dx0;
            x[1] -= dx1;
        } else {
            // Cramer solve for 3x3
            const double det = det_jacobian(x, dim);
            double Jx[9];
            auto cof = [&](int i, int j) {
                const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
                const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
                return J[3 * i1 + j1] * J[3 * i2 + j2] - J[3 * i1 + j2] * J[3 * i2 + j1];
            };
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) Jx[3 * i + j] = cof(j, i) / det;
            for (int i = 0; i < 3; ++i) {
                double s = 0.0;
                for (int j = 0; j < 3; ++j) s += Jx[3 * i + j] * r[j];
                x[i] -= s;
            }
        }
    }
    throw Error("delone_geometry", "diffeomorphism inversion did not converge");
}

void Diffeomorphism::validate(int dim, const BBox& sample_box) const {
    if (!(bound_nu > 0.0))
        throw Error("delone_geometry", "diffeomorphism bound nu must be positive");
    // Sample the declared bounds on a coarse grid of the generation box.
    const int n = 17;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < (dim == 3 ? n : 1); ++c) {
                Point x{};
                x[0] = sample_box.lo[0] + sample_box.extent(0) * a / (n - 1.0);
                x[1] = sample_box.lo[1] + sample_box.extent(1) * b / (n - 1.0);
                if (dim == 3) x[2] = sample_box.lo[2] + sample_box.extent(2) * c / (n - 1.0);
                const double det = det_jacobian(x, dim);
                if (det < bound_nu * (1.0 - 1e-9))
                    throw Error("delone_geometry",
                                "det(grad Phi) drops below the declared nu bound");
                double J[9];
                jacobian(x, dim, J);
                double frob = 0.0;
                for (int i = 0; i < 9; ++i) frob += J[i] * J[i];
                if (std::sqrt(frob) > bound_M * (1.0 + 1e-9) * std::sqrt(double(dim)))
                    throw Error("delone_geometry",
                                "grad Phi exceeds the declared M bound");
            }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

PointSet generate(const GeneratorSpec& spec, std::uint64_t seed) {
    if (!(spec.epsilon > 0.0)) throw Error("delone_geometry", "epsilon must be positive");
    const int dim = spec.dim;
    const double eps = spec.epsilon;
    PointSet ps;
    ps.dim = dim;

    double margin = spec.margin;
    const double sqn = std::sqrt(static_cast<double>(dim));
    switch (spec.kind) {
        case GeneratorSpec::Kind::Cubic:
            if (margin < 0.0) margin = sqn * eps;  // >= covering radius sqrt(n) eps/2
            break;
        case GeneratorSpec::Kind::Rescaled:
            if (!(spec.base_jitter >= 0.0 && spec.base_jitter < 0.5))
                throw Error("delone_geometry", "base jitter must lie in [0, 1/2)");
            if (margin < 0.0) margin = sqn * eps * (1.0 + 2.0 * spec.base_jitter);
            break;
        case GeneratorSpec::Kind::DiffeoOutside:
        case GeneratorSpec::Kind::DiffeoInside: {
            spec.phi.validate(dim, spec.box.expanded(2.0 * eps * spec.phi.bound_M + 1.0));
            if (margin < 0.0) margin = sqn * eps * spec.phi.bound_M * 2.0;
            break;
        }
    }
    const BBox target = spec.box.expanded(margin);

    // Integer index window that maps onto the target box.
    std::array<std::int64_t, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
    const double pad = 2.0;
    if (spec.kind == GeneratorSpec::Kind::Cubic || spec.kind == GeneratorSpec::Kind::Rescaled) {
        for (int d = 0; d < dim; ++d) {
            ilo[d] = static_cast<std::int64_t>(std::floor(target.lo[d] / eps - pad));
            ihi[d] = static_cast<std::int64_t>(std::ceil(target.hi[d] / eps + pad));
        }
    } else {
        // Preimage box of the target under the map, from Newton-inverted
        // corners. Outside kind: i in Phi^{-1}(target)/eps; inside kind:
        // i in Phi^{-1}(target/eps).
        const bool inside = spec.kind == GeneratorSpec::Kind::DiffeoInside;
        Point plo{1e300, 1e300, 1e300}, phi_hi{-1e300, -1e300, -1e300};
        for (int corner = 0; corner < (1 << dim); ++corner) {
            Point y{};
            for (int d = 0; d < dim; ++d) {
                y[d] = (corner >> d) & 1 ? target.hi[d] : target.lo[d];
                if (inside) y[d] /= eps;
            }
            const Point x = spec.phi.inverse(y, dim);
            for (int d = 0; d < dim; ++d) {
                plo[d] = std::min(plo[d], x[d]);
                phi_hi[d] = std::max(phi_hi[d], x[d]);
            }
        }
        for (int d = 0; d < dim; ++d) {
            const double lo = inside ? plo[d] : plo[d] / eps;
            const double hi = inside ? phi_hi[d] : phi_hi[d] / eps;
            ilo[d] = static_cast<std::int64_t>(std::floor(lo - pad));
            ihi[d] = static_cast<std::int64_t>(std::ceil(hi + pad));
        }
    }

    for (std::int64_t k = (dim == 3 ? ilo[2] : 0); k <= (dim == 3 ? ihi[2] : 0); ++k)
        for (std::int64_t j = ilo[1]; j <= ihi[1]; ++j)
            for (std::int64_t i = ilo[0]; i <= ihi[0]; ++i) {
                Point p{};
                switch (spec.kind) {
                    case GeneratorSpec::Kind::Cubic:
                        p = {eps * static_cast<double>(i), eps * static_cast<double>(j),
                             eps * static_cast<double>(k)};
                        break;
                    case GeneratorSpec::Kind::Rescaled: {
                        Point x{static_cast<double>(i), static_cast<double>(j),
                                static_cast<double>(k)};
                        for (int d = 0; d < dim; ++d)
                            x[d] += spec.base_jitter *
                                    (2.0 * rng::site_unit(seed, i, j, k,
                                                          static_cast<std::uint64_t>(d)) -
                                     1.0);
                        for (int d = 0; d < dim; ++d) p[d] = eps * x[d];
                        break;
                    }
                    case GeneratorSpec::Kind::DiffeoOutside: {
                        Point x{eps * static_cast<double>(i), eps * static_cast<double>(j),
                                eps * static_cast<double>(k)};
                        p = spec.phi.apply(x, dim);
                        break;
                    }
                    case GeneratorSpec::Kind::DiffeoInside: {
                        Point x{static_cast<double>(i), static_cast<double>(j),
                                static_cast<double>(k)};
                        const Point y = spec.phi.apply(x, dim);
                        for (int d = 0; d < dim; ++d) p[d] = eps * y[d];
                        break;
                    }
                }
                if (!target.contains(p)) continue;
                ps.points.push_back(p);
                ps.lattice.push_back({i, j, k});
            }
    if (ps.points.empty()) throw Error("delone_geometry", "generator produced no points");
    ps.labels.resize(ps.points.size());
    for (std::size_t t = 0; t < ps.labels.size(); ++t) ps.labels[t] = static_cast<int>(t);
    return ps;
}

// ---------------------------------------------------------------------------
// Limit data
// ---------------------------------------------------------------------------

EmpiricalLimitData estimate_limit_data(const PointSet& ps, const Domain& U, double r_user,
                                       double hist_cell) {
    const double rp = packing_radius(ps);
    if (!(r_user > 0.0) || r_user > rp * (1.0 + 1e-12))
        throw Error("delone_geometry", "need 0 < r_user <= packing radius");
    const DeloneCertificate cert = delone_certificate(ps, U, rp / 8.0);
    const IndexSets idx = index_sets(ps, U, cert, rp / 4.0);

    EmpiricalLimitData out;
    out.r_user = r_user;
    const int n = ps.dim;
    out.n_interior = static_cast<std::int64_t>(idx.interior.size());
    std::int64_t nall = 0;
    std::vector<std::uint8_t> in_u(ps.size(), 0);
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (U.contains(ps.points[i])) {
            in_u[i] = 1;
            ++nall;
        }
    out.n_all_in_u = nall;
    out.theta_hat = static_cast<double>(out.n_interior) * std::pow(r_user, n);
    out.theta_hat_all = static_cast<double>(out.n_all_in_u) * std::pow(r_user, n);
    out.count_discrepancy =
        static_cast<double>(out.n_all_in_u - out.n_interior) /
        static_cast<double>(std::max<std::int64_t>(1, out.n_interior));

    if (U.kind() != Domain::Kind::Rect)
        throw Error("delone_geometry", "histogram estimator requires a rectangular domain");
    out.hist_box = U.bbox();
    for (int d = 0; d < n; ++d) {
        out.hist_shape[d] = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::llround(out.hist_box.extent(d) / hist_cell)));
        out.hist_cell[d] = out.hist_box.extent(d) / static_cast<double>(out.hist_shape[d]);
    }
    if (hist_cell < 2.0 * cert.R_covering)
        out.warning = "histogram under-resolved relative to point spacing";

    std::vector<std::uint8_t> is_interior(ps.size(), 0);
    {
        std::vector<int> sorted = idx.interior;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (std::binary_search(sorted.begin(), sorted.end(), ps.labels[i]))
                is_interior[i] = 1;
    }

    const std::int64_t cells = out.hist_size();
    std::vector<std::int64_t> counts(cells, 0), counts_all(cells, 0);
    auto cell_of = [&](const Point& p) {
        std::int64_t c[3] = {0, 0, 0};
        for (int d = 0; d < n; ++d) {
            auto i = static_cast<std::int64_t>(
                std::floor((p[d] - out.hist_box.lo[d]) / out.hist_cell[d]));
            c[d] = std::clamp<std::int64_t>(i, 0, out.hist_shape[d] - 1);
        }
        return (c[2] * out.hist_shape[1] + c[1]) * out.hist_shape[0] + c[0];
    };
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (is_interior[i]) ++counts[cell_of(ps.points[i])];
        if (in_u[i]) ++counts_all[cell_of(ps.points[i])];
    }
    const double cv = out.cell_volume();
    out.beta.resize(cells);
    out.beta_all.resize(cells);
    for (std::int64_t c = 0; c < cells; ++c) {
        out.beta[c] = out.n_interior > 0
                          ? static_cast<double>(counts[c]) /
                                (static_cast<double>(out.n_interior) * cv)
                          : 0.0;
        out.beta_all[c] = out.n_all_in_u > 0
                              ? static_cast<double>(counts_all[c]) /
                                    (static_cast<double>(out.n_all_in_u) * cv)
                              : 0.0;
    }
    return out;
}

std::vector<double> beta_reference_diffeo_outside(const Diffeomorphism& phi,
                                                  const EmpiricalLimitData& layout) {
    const int n = layout.hist_box.dim;
    const std::int64_t cells = layout.hist_size();
    std::vector<double> ref(cells, 0.0);
    double integral = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        Point p{};
        for (int d = 0; d < n; ++d) {
            const std::int64_t i = rem % layout.hist_shape[d];
            rem /= layout.hist_shape[d];
            p[d] = layout.hist_box.lo[d] + (static_cast<double>(i) + 0.5) * layout.hist_cell[d];
        }
        const Point x = phi.inverse(p, n);
        ref[c] = 1.0 / phi.det_jacobian(x, n);  // det grad Phi^{-1} at p
        integral += ref[c] * layout.cell_volume();
    }
    for (auto& v : ref) v /= integral;
    return ref;
}

double beta_l1_error(const EmpiricalLimitData& data, const std::vector<double>& reference) {
    if (reference.size() != data.beta.size())
        throw Error("delone_geometry", "reference density layout mismatch");
    double err = 0.0;
    for (std::size_t c = 0; c < reference.size(); ++c)
        err += std::abs(data.beta[c] - reference[c]) * data.cell_volume();
    return err;
}

}  // namespace fraclab
