#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fraclab/energy.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

namespace {

UniformGrid unit_grid(std::int64_t n) {
    BBox box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2};
    return UniformGrid::over(box, n);
}

ScalarField random_field(const UniformGrid& g, std::uint64_t seed) {
    ScalarField u = ScalarField::zeros(g);
    rng::Sequence rs(seed);
    for (auto& v : u.values) v = rs.next_in(-1.0, 1.0);
    return u;
}

// Test-side oracle: the naive quadruple loop over ordered node pairs.
double brute_force_energy(const ScalarField& u, const FractionalKernel& k,
                          const NodeMask& rows, const NodeMask& cols) {
    const UniformGrid& g = u.grid;
    double acc = 0.0;
    for (std::int64_t x = 0; x < g.size(); ++x) {
        if (!rows[x]) continue;
        for (std::int64_t y = 0; y < g.size(); ++y) {
            if (!cols[y] || y == x) continue;
            const Point px = g.node(x), py = g.node(y);
            Point z{px[0] - py[0], px[1] - py[1], 0.0};
            acc += k.eval(z) * std::pow(std::abs(u.values[x] - u.values[y]), k.p);
        }
    }
    return std::pow(g.h, 4) * acc;
}

}  // namespace

TEST_CASE("constant field has zero energy") {
    const UniformGrid g = unit_grid(8);
    ScalarField u = ScalarField::zeros(g);
    std::fill(u.values.begin(), u.values.end(), 3.7);
    FractionalKernel k(2, 0.55, 2.0);
    CHECK(gagliardo_energy(u, k, PairRegion::square(mask_all(g))) == 0.0);
}

TEST_CASE("single-node indicator matches the hand-rolled double sum") {
    const UniformGrid g = unit_grid(8);
    ScalarField u = ScalarField::zeros(g);
    u.values[g.index(3, 4)] = 1.0;
    FractionalKernel k(2, 0.55, 2.0);
    const NodeMask all = mask_all(g);
    const double brute = brute_force_energy(u, k, all, all);
    CHECK(gagliardo_energy(u, k, PairRegion::square(all)) ==
          doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("exhaustive agreement with brute force on grids up to 12^2") {
    for (std::int64_t n : {4, 5, 6, 7, 8, 9, 10, 11, 12}) {
        const UniformGrid g = unit_grid(n);
        const ScalarField u = random_field(g, 100 + n);
        for (double p : {2.0, 2.6}) {
            FractionalKernel k(2, p == 2.0 ? 0.55 : 0.45, p);
            const NodeMask all = mask_all(g);
            const double brute = brute_force_energy(u, k, all, all);
            CHECK(gagliardo_energy(u, k, PairRegion::square(all)) ==
                  doctest::Approx(brute).epsilon(1e-11));
        }
    }
}

TEST_CASE("energy is reproducible across thread counts") {
    const UniformGrid g = unit_grid(24);
    const ScalarField u = random_field(g, 7);
    FractionalKernel k(2, 0.55, 2.0);
    set_thread_count(1);
    const double e1 = gagliardo_energy(u, k, PairRegion::square(mask_all(g)));
    set_thread_count(8);
    const double e8 = gagliardo_energy(u, k, PairRegion::square(mask_all(g)));
    set_thread_count(0);
    CHECK(e1 == e8);  // bitwise
}

TEST_CASE("splitting identity for disjoint masks") {
    const UniformGrid g = unit_grid(10);
    const ScalarField u = random_field(g, 9);
    FractionalKernel k(2, 0.55, 2.0);
    NodeMask A(g.size(), 0), B(g.size(), 0), AB(g.size(), 0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point p = g.node(i);
        if (p[0] < 0.45) A[i] = 1;
        else if (p[0] > 0.55) B[i] = 1;
        AB[i] = A[i] || B[i];
    }
    const double whole = gagliardo_energy(u, k, PairRegion::square(AB));
    const double ea = gagliardo_energy(u, k, PairRegion::square(A));
    const double eb = gagliardo_energy(u, k, PairRegion::square(B));
    const double d = locality_defect(u, k, A, B);
    CHECK(whole == doctest::Approx(ea + eb + 2.0 * d).epsilon(1e-12));

    SUBCASE("constant field has zero defect") {
        ScalarField c = ScalarField::zeros(g);
        std::fill(c.values.begin(), c.values.end(), 1.0);
        CHECK(locality_defect(c, k, A, B) == 0.0);
    }
    SUBCASE("overlapping masks are rejected") {
        CHECK_THROWS_AS(locality_defect(u, k, AB, B), Error);
    }
}

TEST_CASE("defect on a 6x6 grid matches brute force") {
    const UniformGrid g = unit_grid(6);
    const ScalarField u = random_field(g, 11);
    FractionalKernel k(2, 0.55, 2.0);
    NodeMask A(g.size(), 0), B(g.size(), 0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point p = g.node(i);
        (p[1] < 0.5 ? A : B)[i] = 1;
    }
    CHECK(locality_defect(u, k, A, B) ==
          doctest::Approx(brute_force_energy(u, k, A, B)).epsilon(1e-12));
    KernelConvolver conv(g, k);
    CHECK(locality_defect_fft(u, k, A, B, conv) ==
          doctest::Approx(brute_force_energy(u, k, A, B)).epsilon(1e-10));
}

TEST_CASE("FFT energy path matches the direct sum") {
    const UniformGrid g = unit_grid(32);
    const ScalarField u = random_field(g, 13);
    FractionalKernel k(2, 0.55, 2.0);
    KernelConvolver conv(g, k);
    const double direct = gagliardo_energy(u, k, PairRegion::square(mask_all(g)));
    const double fft = gagliardo_energy_fft(u, k, mask_all(g), conv);
    CHECK(fft == doctest::Approx(direct).epsilon(1e-11));

    SUBCASE("masked region") {
        const NodeMask ball = mask_ball(g, {0.5, 0.5, 0.0}, 0.3);
        CHECK(gagliardo_energy_fft(u, k, ball, conv) ==
              doctest::Approx(gagliardo_energy(u, k, PairRegion::square(ball)))
                  .epsilon(1e-11));
    }
}

TEST_CASE("operator: constant field maps to zero") {
    const UniformGrid g = unit_grid(16);
    ScalarField u = ScalarField::zeros(g);
    std::fill(u.values.begin(), u.values.end(), -2.0);
    FractionalKernel k(2, 0.55, 2.0);
    const ScalarField v = apply_operator(u, k, mask_all(g), OperatorMethod::Fft);
    double vmax = 0.0;
    for (double t : v.values) vmax = std::max(vmax, std::abs(t));
    // absolute scale of the operator diagonal
    const ScalarField w = apply_operator(u, k, mask_all(g), OperatorMethod::Direct);
    double wmax = 0.0;
    for (double t : w.values) wmax = std::max(wmax, std::abs(t));
    CHECK(wmax == 0.0);
    CHECK(vmax <= 1e-10);  // FFT path: roundoff only
}

TEST_CASE("operator: FFT vs direct on 64^2 within 1e-10 relative") {
    const UniformGrid g = unit_grid(64);
    const ScalarField u = random_field(g, 17);
    FractionalKernel k(2, 0.55, 2.0);
    const ScalarField vf = apply_operator(u, k, mask_all(g), OperatorMethod::Fft);
    const ScalarField vd = apply_operator(u, k, mask_all(g), OperatorMethod::Direct);
    double scale = 0.0;
    for (double t : vd.values) scale = std::max(scale, std::abs(t));
    double err = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(vf.values[i] - vd.values[i]));
    CHECK(err / scale <= 1e-10);
}

TEST_CASE("operator: single-node bump neighbor value") {
    const UniformGrid g = unit_grid(8);
    ScalarField u = ScalarField::zeros(g);
    u.values[g.index(4, 4)] = 1.0;
    FractionalKernel k(2, 0.55, 2.0);
    const ScalarField v = apply_operator(u, k, mask_all(g), OperatorMethod::Direct);
    const double expected = -2.0 * std::pow(g.h, 4) * k.eval({g.h, 0.0, 0.0});
    CHECK(v.values[g.index(5, 4)] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fft path refuses p != 2 and cutoff") {
    const UniformGrid g = unit_grid(8);
    const ScalarField u = random_field(g, 3);
    FractionalKernel k(2, 0.5, 2.4);
    CHECK_THROWS_AS(apply_operator(u, k, mask_all(g), OperatorMethod::Fft), Error);
}

TEST_CASE("discrete seminorm scaling under grid dilation") {
    // u_r(x) = u(x/r) sampled on the dilated grid: exact r^{n-sp} scaling.
    const UniformGrid g = unit_grid(20);
    const ScalarField u = random_field(g, 23);
    FractionalKernel k(2, 0.55, 2.0);
    const double base = gagliardo_energy(u, k, PairRegion::square(mask_all(g)));
    for (double r : {0.5, 2.0, 3.0}) {
        UniformGrid gr = g;
        gr.h = g.h * r;
        for (int d = 0; d < 2; ++d) gr.lo[d] = g.lo[d] * r;
        ScalarField ur;
        ur.grid = gr;
        ur.values = u.values;  // same nodal samples at dilated positions
        const double er = gagliardo_energy(ur, k, PairRegion::square(mask_all(gr)));
        CHECK(er == doctest::Approx(std::pow(r, 2.0 - 1.1) * base).epsilon(1e-12));
    }
}

TEST_CASE("smooth bump energy is grid-consistent within 2%") {
    FractionalKernel k(2, 0.55, 2.0);
    auto bump_energy = [&](std::int64_t n) {
        const UniformGrid g = unit_grid(n);
        ScalarField u = ScalarField::zeros(g);
        for (std::int64_t i = 0; i < g.size(); ++i)
            u.values[i] = std::exp(-dist2(g.node(i), {0.5, 0.5, 0.0}, 2) / 0.045);
        KernelConvolver conv(g, k);
        return gagliardo_energy_fft(u, k, mask_all(g), conv);
    };
    const double e64 = bump_energy(64);
    const double e128 = bump_energy(128);
    CHECK(std::abs(e64 - e128) / e128 <= 0.02);
}

TEST_CASE("cutoff radius drops a bounded tail") {
    const UniformGrid g = unit_grid(16);
    const ScalarField u = random_field(g, 29);
    FractionalKernel k(2, 0.55, 2.0);
    const NodeMask all = mask_all(g);
    const double full = gagliardo_energy(u, k, PairRegion::square(all));
    const double cut = gagliardo_energy(u, k, PairRegion::square(all), 0.25);
    CHECK(cut <= full);
    CHECK(full - cut <= energy_cutoff_tail_bound(u, k, all, 0.25));
}

TEST_CASE("Adams bound, regime (i): ball around the singularity") {
    // Analytic oracle: the integral of |x|^{-1} over the unit disc is 2*pi.
    BBox box{{-1.1, -1.1, 0.0}, {1.1, 1.1, 0.0}, 2};
    const UniformGrid g = UniformGrid::over(box, 220);
    const NodeMask O = mask_ball(g, {0.0, 0.0, 0.0}, 1.0);
    const AdamsReport rep = adams_bound_check(g, O, {0.0, 0.0, 0.0}, 1.0);
    CHECK(rep.regime == 1);
    CHECK(rep.pass);
    CHECK(rep.quadrature == doctest::Approx(2.0 * M_PI).epsilon(0.02));
}

TEST_CASE("Adams bound, regime (ii): annulus around a distant point") {
    // Analytic oracle: integral over |x| >= d of |x|^{-nu} is
    // n w_n / (nu - n) d^{n - nu}; a finite annulus undershoots it.
    BBox box{{-3.0, -3.0, 0.0}, {3.0, 3.0, 0.0}, 2};
    const UniformGrid g = UniformGrid::over(box, 300);
    const double d = 0.5, nu = 3.5;
    NodeMask O(g.size(), 0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double r = dist(g.node(i), {0.0, 0.0, 0.0}, 2);
        if (r >= d && r <= 2.9) O[i] = 1;
    }
    const AdamsReport rep = adams_bound_check(g, O, {0.0, 0.0, 0.0}, nu);
    CHECK(rep.regime == 2);
    CHECK(rep.pass);
    const double analytic = 2.0 * M_PI / (nu - 2.0) * std::pow(d, 2.0 - nu);
    CHECK(rep.quadrature == doctest::Approx(analytic).epsilon(0.08));
}

TEST_CASE("Adams bound: empty set") {
    BBox box{{-1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}, 2};
    const UniformGrid g = UniformGrid::over(box, 16);
    const NodeMask O(g.size(), 0);
    const AdamsReport rep = adams_bound_check(g, O, {0.0, 0.0, 0.0}, 1.0);
    CHECK(rep.quadrature == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("Poincare/Hardy probe: slope and bounded ratios") {
    FractionalKernel k(2, 0.55, 2.0);
    const PoincareHardyReport rep = poincare_hardy_probe(k, 1.0, 192, 40, 4242);
    CHECK(rep.ratios_finite);
    CHECK(rep.slope_ok);
    CHECK(rep.fitted_slope == doctest::Approx(1.1).epsilon(0.1));
    CHECK(rep.hardy_max > 0.0);
    CHECK(std::isfinite(rep.hardy_max));
}
