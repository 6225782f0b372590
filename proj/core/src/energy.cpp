#include "fraclab/energy.hpp"

#include <algorithm>
#include <cmath>

#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

double pow_abs(double t, double p) {
    if (p == 2.0) return t * t;
    return std::pow(std::abs(t), p);
}

}  // namespace

double gagliardo_energy(const ScalarField& u, const FractionalKernel& k, const PairRegion& E,
                        double cutoff_radius) {
    const UniformGrid& g = u.grid;
    const auto rows = mask_indices(E.rows);
    const auto cols = mask_indices(E.cols);
    if (rows.empty() || cols.empty()) return 0.0;

    const double p = k.p;
    const double band = E.diag_band.value_or(0.0);
    const bool has_band = E.diag_band.has_value();
    const bool complement = E.band_complement;
    const double band2 = band * band;
    const double cut2 = cutoff_radius > 0.0 ? cutoff_radius * cutoff_radius : 0.0;

    std::vector<double> row_sums(rows.size(), 0.0);
    parallel_for(0, static_cast<std::int64_t>(rows.size()), [&](std::int64_t ri) {
        const std::int64_t x = rows[ri];
        const Point px = g.node(x);
        const double ux = u.values[x];
        double acc = 0.0;
        for (std::int64_t y : cols) {
            if (y == x) continue;
            const Point py = g.node(y);
            const double d2 = dist2(px, py, g.dim);
            if (has_band) {
                const bool inside = d2 < band2;
                if (inside == complement) continue;
            }
            if (cut2 > 0.0 && d2 > cut2) continue;
            Point z{px[0] - py[0], px[1] - py[1], px[2] - py[2]};
            acc += k.eval(z) * pow_abs(ux - u.values[y], p);
        }
        row_sums[ri] = acc;
    });
    const double h2n = std::pow(g.h, 2 * g.dim);
    return h2n * pairwise_sum(row_sums);
}

double energy_cutoff_tail_bound(const ScalarField& u, const FractionalKernel& k,
                                const NodeMask& rows, double cutoff_radius) {
    if (cutoff_radius <= 0.0) return 0.0;
    const UniformGrid& g = u.grid;
    double umax = 0.0;
    for (double v : u.values) umax = std::max(umax, std::abs(v));
    const double n = g.dim;
    const double tail = n * unit_ball_volume(g.dim) / k.sp() * std::pow(cutoff_radius, -k.sp());
    double sum = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (rows[i]) sum += pow_abs(u.values[i], k.p) + pow_abs(umax, k.p);
    return std::pow(2.0, k.p - 1.0) * k.alpha() * std::pow(g.h, g.dim) * sum * tail;
}

double gagliardo_energy_fft(const ScalarField& u, const FractionalKernel& k, const NodeMask& mask,
                            KernelConvolver& conv) {
    if (k.p != 2.0) throw Error("energy", "FFT energy path requires p = 2");
    const UniformGrid& g = u.grid;
    if (!conv.grid().same_layout(g)) throw Error("energy", "convolver/grid mismatch");
    const std::int64_t n = g.size();
    std::vector<double> um(n, 0.0), chi(n, 0.0), ku(n), kchi(n);
    for (std::int64_t i = 0; i < n; ++i)
        if (mask[i]) {
            um[i] = u.values[i];
            chi[i] = 1.0;
        }
    conv.apply(um.data(), ku.data());
    conv.apply(chi.data(), kchi.data());
    std::vector<double> terms(n, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        if (mask[i]) terms[i] = um[i] * (um[i] * kchi[i] - ku[i]);
    const double h2n = std::pow(g.h, 2 * g.dim);
    return 2.0 * h2n * pairwise_sum(terms);
}

double locality_defect(const ScalarField& u, const FractionalKernel& k, const NodeMask& A,
                       const NodeMask& B) {
    if (A.size() != B.size()) throw Error("energy", "mask size mismatch");
    for (std::size_t i = 0; i < A.size(); ++i)
        if (A[i] && B[i]) throw Error("energy", "locality defect requires disjoint masks");
    PairRegion E{A, B, std::nullopt, false};
    return gagliardo_energy(u, k, E);
}

double locality_defect_fft(const ScalarField& u, const FractionalKernel& k, const NodeMask& A,
                           const NodeMask& B, KernelConvolver& conv) {
    if (k.p != 2.0) throw Error("energy", "FFT defect path requires p = 2");
    const UniformGrid& g = u.grid;
    const std::int64_t n = g.size();
    // D(u, AxB) = <u^2 chi_A, K*chi_B> + <chi_A, K*(u^2 chi_B)> - 2 <u chi_A, K*(u chi_B)>
    std::vector<double> ub(n, 0.0), u2b(n, 0.0), chib(n, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        if (B[i]) {
            ub[i] = u.values[i];
            u2b[i] = u.values[i] * u.values[i];
            chib[i] = 1.0;
        }
    std::vector<double> kub(n), ku2b(n), kchib(n);
    conv.apply(ub.data(), kub.data());
    conv.apply(u2b.data(), ku2b.data());
    conv.apply(chib.data(), kchib.data());
    std::vector<double> terms(n, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        if (A[i]) {
            const double ua = u.values[i];
            terms[i] = ua * ua * kchib[i] + ku2b[i] - 2.0 * ua * kub[i];
        }
    const double h2n = std::pow(g.h, 2 * g.dim);
    return h2n * pairwise_sum(terms);
}

ScalarField apply_operator(const ScalarField& u, const FractionalKernel& k, const NodeMask& mask,
                           OperatorMethod method, KernelConvolver* conv, double cutoff_radius) {
    const UniformGrid& g = u.grid;
    ScalarField out = ScalarField::zeros(g);
    const double h2n = std::pow(g.h, 2 * g.dim);

    if (method == OperatorMethod::Fft) {
        if (k.p != 2.0) throw Error("energy", "FFT operator path requires p = 2");
        if (cutoff_radius > 0.0)
            throw Error("energy", "cutoff radius is supported on the direct path only");
        std::unique_ptr<KernelConvolver> own;
        if (!conv) {
            own = std::make_unique<KernelConvolver>(g, k);
            conv = own.get();
        }
        const std::int64_t n = g.size();
        std::vector<double> um(n, 0.0), chi(n, 0.0), ku(n), kchi(n);
        for (std::int64_t i = 0; i < n; ++i)
            if (mask[i]) {
                um[i] = u.values[i];
                chi[i] = 1.0;
            }
        conv->apply(um.data(), ku.data());
        conv->apply(chi.data(), kchi.data());
        for (std::int64_t i = 0; i < n; ++i)
            if (mask[i]) out.values[i] = 2.0 * h2n * (um[i] * kchi[i] - ku[i]);
        return out;
    }

    const auto nodes = mask_indices(mask);
    const double p = k.p;
    const double cut2 = cutoff_radius > 0.0 ? cutoff_radius * cutoff_radius : 0.0;
    parallel_for(0, static_cast<std::int64_t>(nodes.size()), [&](std::int64_t xi) {
        const std::int64_t x = nodes[xi];
        const Point px = g.node(x);
        const double ux = u.values[x];
        double acc = 0.0;
        for (std::int64_t y : nodes) {
            if (y == x) continue;
            const Point py = g.node(y);
            if (cut2 > 0.0 && dist2(px, py, g.dim) > cut2) continue;
            Point z{px[0] - py[0], px[1] - py[1], px[2] - py[2]};
            const double dv = ux - u.values[y];
            double w = dv;
            if (p != 2.0) w = pow_abs(dv, p - 2.0) * dv;
            acc += k.eval(z) * w;
        }
        out.values[x] = p * h2n * acc;
    });
    return out;
}

AdamsReport adams_bound_check(const UniformGrid& g, const NodeMask& O, const Point& z, double nu) {
    AdamsReport rep;
    const int n = g.dim;
    const double wn = unit_ball_volume(n);
    const auto nodes = mask_indices(O);
    rep.set_measure = std::pow(g.h, n) * static_cast<double>(nodes.size());

    double dmin = std::numeric_limits<double>::infinity();
    for (std::int64_t i : nodes) dmin = std::min(dmin, dist(g.node(i), z, n));
    rep.distance = nodes.empty() ? 0.0 : dmin;

    if (nu > 0.0 && nu < static_cast<double>(n)) {
        rep.regime = 1;
        if (!nodes.empty() && dmin > g.h)
            throw Error("energy", "regime (i) needs dist(z, O) = 0 at grid accuracy");
        rep.constant = nu / (n - nu) * std::pow(wn, nu / n) + std::pow(wn, nu / n);
        rep.bound = rep.constant * std::pow(rep.set_measure, 1.0 - nu / n);
    } else if (nu > static_cast<double>(n)) {
        rep.regime = 2;
        if (!nodes.empty() && !(dmin > 0.0))
            throw Error("energy", "regime (ii) needs dist(z, O) > 0");
        rep.constant = n * wn / (nu - n);
        rep.bound = nodes.empty() ? 0.0 : rep.constant * std::pow(dmin, n - nu);
    } else {
        throw Error("energy", "nu must lie in (0,n) or (n,inf)");
    }

    std::vector<double> terms;
    terms.reserve(nodes.size());
    for (std::int64_t i : nodes) {
        const double r = dist(g.node(i), z, n);
        if (r <= 0.5 * g.h) continue;  // singular node excluded from the quadrature
        terms.push_back(std::pow(r, -nu));
    }
    rep.quadrature = std::pow(g.h, n) * pairwise_sum(terms);
    rep.pass = rep.quadrature <= rep.bound * (1.0 + 1e-12);
    return rep;
}

namespace {

double lp_norm_p(const ScalarField& u, const NodeMask& m, double p) {
    std::vector<double> t;
    t.reserve(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (m[i]) t.push_back(pow_abs(u.values[i], p));
    return std::pow(u.grid.h, u.grid.dim) * pairwise_sum(t);
}

}  // namespace

PoincareHardyReport poincare_hardy_probe(const FractionalKernel& k, double ball_radius,
                                         std::int64_t resolution, int n_fields,
                                         std::uint64_t seed) {
    if (k.p != 2.0) throw Error("energy", "probe requires p = 2");
    PoincareHardyReport rep;
    rep.expected_slope = k.sp();

    BBox box;
    box.dim = k.dim;
    for (int d = 0; d < k.dim; ++d) {
        box.lo[d] = -1.2 * ball_radius;
        box.hi[d] = 1.2 * ball_radius;
    }
    const UniformGrid g = UniformGrid::over(box, resolution);
    KernelConvolver conv(g, k);
    const Point origin{};
    const NodeMask ball = mask_ball(g, origin, ball_radius);
    const double hn = std::pow(g.h, g.dim);

    rep.ratios_finite = true;
    rng::Sequence rs(seed);
    for (int f = 0; f < n_fields; ++f) {
        ScalarField u = ScalarField::zeros(g);
        // Exterior-zero random field supported strictly inside the ball.
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (ball[i] && dist(g.node(i), origin, g.dim) < 0.9 * ball_radius)
                u.values[i] = rs.next_in(-1.0, 1.0);
        const double sem = gagliardo_energy_fft(u, k, ball, conv);
        double mass = 0.0, cnt = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (ball[i]) {
                mass += u.values[i];
                cnt += 1.0;
            }
        const double mean = cnt > 0 ? mass / cnt : 0.0;
        ScalarField cent = u;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (ball[i]) cent.values[i] = u.values[i] - mean;
        const double pw_num = lp_norm_p(cent, ball, k.p);
        const double p_num = lp_norm_p(u, ball, k.p);
        std::vector<double> hardy_terms;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (ball[i]) {
                const double dist_b = ball_radius - dist(g.node(i), origin, g.dim);
                if (dist_b > 0.0)
                    hardy_terms.push_back(pow_abs(u.values[i], k.p) * std::pow(dist_b, -k.sp()));
            }
        const double hardy_num = hn * pairwise_sum(hardy_terms);
        if (sem == 0.0) {
            ++rep.vacuous_fields;  // constant field: 0/0 is vacuous, skipped
            continue;
        }
        rep.poincare_wirtinger_max = std::max(rep.poincare_wirtinger_max, pw_num / sem);
        rep.poincare_max = std::max(rep.poincare_max, p_num / sem);
        rep.hardy_max = std::max(rep.hardy_max, hardy_num / sem);
        if (!std::isfinite(pw_num / sem) || !std::isfinite(hardy_num / sem))
            rep.ratios_finite = false;
    }

    // Fixed bump on shrinking balls; PW ratio should scale like r^{sp}.
    for (double r : {ball_radius, 0.5 * ball_radius, 0.25 * ball_radius}) {
        const NodeMask br = mask_ball(g, origin, r);
        ScalarField u = ScalarField::zeros(g);
        const double w = 0.45 * r;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (br[i]) u.values[i] = std::exp(-dist2(g.node(i), origin, g.dim) / (w * w));
        const double sem = gagliardo_energy_fft(u, k, br, conv);
        double mass = 0.0, cnt = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (br[i]) {
                mass += u.values[i];
                cnt += 1.0;
            }
        ScalarField cent = u;
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (br[i]) cent.values[i] = u.values[i] - mass / cnt;
        rep.sweep_radii.push_back(r);
        rep.sweep_ratios.push_back(lp_norm_p(cent, br, k.p) / sem);
    }
    // Least-squares slope in log-log coordinates.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(rep.sweep_radii.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(rep.sweep_radii[i]);
        const double y = std::log(rep.sweep_ratios[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.fitted_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.slope_ok = std::abs(rep.fitted_slope - rep.expected_slope) <= 0.1;
    return rep;
}

}  // namespace fraclab
