#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fraclab/geometry.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

namespace {

PointSet cubic_set(double eps, const BBox& box, double margin = -1.0) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Cubic;
    spec.epsilon = eps;
    spec.box = box;
    spec.margin = margin;
    return generate(spec, 1);
}

PointSet uniform_points(int n, std::uint64_t seed) {
    PointSet ps;
    ps.dim = 2;
    rng::Sequence rs(seed);
    for (int i = 0; i < n; ++i) {
        ps.points.push_back({rs.next_unit(), rs.next_unit(), 0.0});
        ps.labels.push_back(i);
    }
    return ps;
}

const BBox kUnitBox{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2};

}  // namespace

TEST_CASE("packing radius of the cubic lattice is eps/2") {
    const PointSet ps = cubic_set(0.25, kUnitBox);
    CHECK(packing_radius(ps) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("packing radius of two points at distance 1") {
    PointSet ps;
    ps.dim = 2;
    ps.points = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    ps.labels = {0, 1};
    CHECK(packing_radius(ps) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("packing radius equals the brute-force pairwise scan") {
    const PointSet ps = uniform_points(100, 77);
    // oracle: O(N^2) minimum over pairs
    double best = 1e300;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            best = std::min(best, dist(ps.points[i], ps.points[j], 2));
    CHECK(packing_radius(ps) == doctest::Approx(0.5 * best).epsilon(1e-15));
}

TEST_CASE("degenerate sets are rejected") {
    PointSet ps;
    ps.dim = 2;
    ps.points = {{0.0, 0.0, 0.0}};
    ps.labels = {0};
    CHECK_THROWS_WITH_AS(packing_radius(ps),
                         "delone_geometry: degenerate set: need >= 2 points", Error);
}

TEST_CASE("covering radius of the cubic lattice") {
    const PointSet ps = cubic_set(0.25, kUnitBox);
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const double R = covering_radius(ps, U, 1e-3);
    CHECK(R == doctest::Approx(0.25 * std::sqrt(2.0) / 2.0).epsilon(0.012));
    CHECK(R <= 0.25 * std::sqrt(2.0) / 2.0 + 1e-12);  // approximates from below
}

TEST_CASE("covering radius of a single point over a ball region") {
    PointSet ps;
    ps.dim = 2;
    ps.points = {{0.3, 0.4, 0.0}, {0.3, 20.0, 0.0}};  // second point far away
    ps.labels = {0, 1};
    const Domain ball = Domain::ball({0.3, 0.4, 0.0}, 1.0, 2);
    const double R = covering_radius(ps, ball, 2e-3);
    CHECK(R == doctest::Approx(1.0).epsilon(0.004));
}

TEST_CASE("covering radius matches an exhaustive probe oracle") {
    const PointSet ps = uniform_points(60, 5);
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const double probe = 0.01;
    const double R = covering_radius(ps, U, probe);
    // oracle: same probe grid, linear scan over all points
    const std::int64_t n = static_cast<std::int64_t>(std::ceil(1.0 / probe));
    double best = 0.0;
    for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t i = 0; i < n; ++i) {
            Point q{(i + 0.5) / static_cast<double>(n), (j + 0.5) / static_cast<double>(n),
                    0.0};
            if (!U.contains(q)) continue;
            double dmin = 1e300;
            for (const auto& p : ps.points) dmin = std::min(dmin, dist(p, q, 2));
            best = std::max(best, dmin);
        }
    CHECK(R == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("voronoi_index basics and tie break") {
    PointSet ps;
    ps.dim = 2;
    ps.points = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    ps.labels = {7, 3};
    CHECK(voronoi_index(ps, {0.0, 0.0, 0.0}) == 7);  // exact hit
    CHECK(voronoi_index(ps, {1.0, 0.0, 0.0}) == 3);
    // midpoint: equidistant, smaller label wins
    CHECK(voronoi_index(ps, {0.5, 0.0, 0.0}) == 3);
}

TEST_CASE("voronoi_index agrees with the linear-scan oracle on 1e4 queries") {
    const PointSet ps = uniform_points(500, 12);
    rng::Sequence rs(99);
    for (int q = 0; q < 10000; ++q) {
        Point x{rs.next_in(-0.2, 1.2), rs.next_in(-0.2, 1.2), 0.0};
        int best = -1;
        double bd = 1e300;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const double d = dist2(ps.points[i], x, 2);
            if (d < bd || (d == bd && ps.labels[i] < best)) {
                bd = d;
                best = ps.labels[i];
            }
        }
        REQUIRE(voronoi_index(ps, x) == best);
    }
}

TEST_CASE("index sets of the 1/8 cubic lattice in the unit square") {
    const PointSet ps = cubic_set(0.125, kUnitBox);
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const DeloneCertificate cert = delone_certificate(ps, U, 0.0);
    const IndexSets idx = index_sets(ps, U, cert, cert.r_packing / 4.0);
    CHECK(idx.interior.size() == 49);  // the 7x7 interior points

    SUBCASE("sample resolution guard") {
        CHECK_THROWS_AS(index_sets(ps, U, cert, cert.r_packing), Error);
    }
    SUBCASE("domain with margin has no boundary cells") {
        const BBox b = U.bbox();
        const Domain big = Domain::rect(
            {b.lo[0] - 10.0, b.lo[1] - 10.0, 0.0}, {b.hi[0] + 10.0, b.hi[1] + 10.0, 0.0}, 2);
        const IndexSets idx2 = index_sets(ps, big, cert, cert.r_packing / 4.0);
        CHECK(idx2.boundary.empty());
        CHECK(idx2.interior.size() == ps.size());
    }
    SUBCASE("domain below one cell diameter has empty interior") {
        const Domain tiny = Domain::rect({0.47, 0.47, 0.0}, {0.53, 0.53, 0.0}, 2);
        const IndexSets idx3 = index_sets(ps, tiny, cert, cert.r_packing / 4.0);
        CHECK(idx3.interior.empty());
    }
}

TEST_CASE("counting bounds hold for the cubic lattice") {
    const PointSet ps = cubic_set(0.125, kUnitBox);
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const DeloneCertificate cert = delone_certificate(ps, U, 0.0);
    const IndexSets idx = index_sets(ps, U, cert, cert.r_packing / 4.0);
    const CountingReport rep = counting_check(ps, U, idx, cert);
    CHECK(rep.interior_ok);
    CHECK(rep.boundary_ok);
    CHECK(rep.leftover_ok);
    CHECK(rep.shell_ok);
    CHECK(rep.pass);
}

TEST_CASE("counting bound is trivial for a single interior cell") {
    // The inequality omega_n r^n #I <= L^n(A) with one interior label and a
    // large square holds with any certificate radius below the square side.
    PointSet ps;
    ps.dim = 2;
    ps.points = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    ps.labels = {0, 1};
    const Domain A = Domain::rect({-50, -50, 0}, {50, 50, 0}, 2);
    IndexSets idx;
    idx.interior = {0};
    idx.cell_sample_resolution = 0.125;
    DeloneCertificate cert{0.5, 50.0, 0.01};
    const CountingReport rep = counting_check(ps, A, idx, cert, 0.0, 5);
    CHECK(rep.interior_ok);
    CHECK(rep.interior_lhs == doctest::Approx(M_PI * 0.25).epsilon(1e-12));
}

TEST_CASE("shell counts on the integer lattice") {
    // Enumeration oracle on Z^2 with unit shell width: the m = 1 shell
    // (distances in (1, 2]) is the 5x5 ring minus the 3x3 block: 16 points.
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Cubic;
    spec.epsilon = 1.0;
    spec.box = BBox{{-10.0, -10.0, 0.0}, {10.0, 10.0, 0.0}, 2};
    spec.margin = 0.0;
    const PointSet ps = generate(spec, 1);
    const Domain A = Domain::rect({-12, -12, 0}, {12, 12, 0}, 2);
    const DeloneCertificate cert = delone_certificate(ps, A, 0.05);
    const IndexSets idx = index_sets(ps, A, cert, cert.r_packing / 4.0);
    const CountingReport rep = counting_check(ps, A, idx, cert, /*shell_width=*/1.0, 8);
    CHECK(rep.shell_max_counts[0] == 16);
    CHECK(rep.shell_c_fit >= 16.0);
    CHECK(rep.shell_ok);
}

TEST_CASE("generate: cubic 1/8 covers the unit square with 81 inside points") {
    const PointSet ps = cubic_set(0.125, kUnitBox);
    std::int64_t inside = 0;
    for (const auto& p : ps.points)
        if (p[0] >= -1e-12 && p[0] <= 1.0 + 1e-12 && p[1] >= -1e-12 && p[1] <= 1.0 + 1e-12)
            ++inside;
    CHECK(inside == 81);
    CHECK(ps.size() > 81);  // margin ring present
}

TEST_CASE("generate: diffeo_outside with the identity equals cubic") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::DiffeoOutside;
    spec.epsilon = 0.125;
    spec.box = kUnitBox;
    spec.phi = Diffeomorphism{};  // identity
    spec.margin = 0.25;
    const PointSet a = generate(spec, 1);
    PointSet b = cubic_set(0.125, kUnitBox, 0.25);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i][0] == doctest::Approx(b.points[i][0]).epsilon(1e-15));
        CHECK(a.points[i][1] == doctest::Approx(b.points[i][1]).epsilon(1e-15));
    }
}

TEST_CASE("generate: sheared diffeo respects the packing bound") {
    Diffeomorphism phi;
    phi.shear = 0.3;
    phi.amp = 0.05;
    phi.center = {0.5, 0.5, 0.0};
    phi.width = 0.4;
    phi.bound_M = 1.6;
    phi.bound_nu = 0.5;
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::DiffeoOutside;
    spec.epsilon = 1.0 / 16.0;
    spec.box = kUnitBox;
    spec.phi = phi;
    const PointSet ps = generate(spec, 1);
    const double lower = 0.5 * phi.bound_nu * std::pow(phi.bound_M, -1.0) * spec.epsilon;
    CHECK(packing_radius(ps) >= lower);
}

TEST_CASE("generate: invalid diffeomorphism bound is rejected") {
    Diffeomorphism phi;
    phi.bound_nu = 0.0;
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::DiffeoInside;
    spec.phi = phi;
    CHECK_THROWS_AS(generate(spec, 1), Error);
}

TEST_CASE("limit data of the cubic lattice") {
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    SUBCASE("theta converges to 1/4 with r = eps/2") {
        for (double eps : {0.125, 1.0 / 16.0, 1.0 / 32.0}) {
            const PointSet ps = cubic_set(eps, kUnitBox);
            const EmpiricalLimitData d = estimate_limit_data(ps, U, eps / 2.0, 0.25);
            CHECK(std::abs(d.theta_hat - 0.25) <= 3.0 * eps);
        }
    }
    SUBCASE("beta is flat and integrates to one") {
        const double eps = 1.0 / 32.0;
        const PointSet ps = cubic_set(eps, kUnitBox);
        const EmpiricalLimitData d = estimate_limit_data(ps, U, eps / 2.0, 0.25);
        double integral = 0.0, l1 = 0.0;
        for (double b : d.beta) {
            integral += b * d.cell_volume();
            l1 += std::abs(b - 1.0) * d.cell_volume();
        }
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(l1 <= 0.10);
        CHECK(d.warning.empty());
    }
    SUBCASE("under-resolved histogram warns") {
        const PointSet ps = cubic_set(0.25, kUnitBox);
        const EmpiricalLimitData d = estimate_limit_data(ps, U, 0.125, 0.25);
        CHECK(!d.warning.empty());
    }
    SUBCASE("r_user above the packing radius is rejected") {
        const PointSet ps = cubic_set(0.25, kUnitBox);
        CHECK_THROWS_AS(estimate_limit_data(ps, U, 0.2, 0.25), Error);
    }
}

TEST_CASE("diffeo limit density matches the Jacobian reference") {
    Diffeomorphism phi;
    phi.shear = 0.2;
    phi.amp = 0.12;
    phi.center = {0.5, 0.5, 0.0};
    phi.width = 0.45;
    phi.bound_M = 1.6;
    phi.bound_nu = 0.4;
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::DiffeoOutside;
    spec.epsilon = 1.0 / 32.0;
    spec.box = kUnitBox;
    spec.phi = phi;
    const PointSet ps = generate(spec, 1);
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const EmpiricalLimitData d = estimate_limit_data(ps, U, packing_radius(ps), 0.25);
    const std::vector<double> ref = beta_reference_diffeo_outside(phi, d);
    CHECK(beta_l1_error(d, ref) <= 0.15);
    // against the flat density the error is visibly larger
    std::vector<double> flat(ref.size(), 1.0);
    CHECK(beta_l1_error(d, ref) < beta_l1_error(d, flat));
}

TEST_CASE("counting bounds across generators and seeds") {
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (auto kind : {GeneratorSpec::Kind::Rescaled, GeneratorSpec::Kind::DiffeoInside}) {
            GeneratorSpec spec;
            spec.kind = kind;
            spec.epsilon = 1.0 / 12.0;
            spec.box = kUnitBox;
            spec.base_jitter = 0.3;
            spec.phi.shear = 0.15;
            spec.phi.amp = 0.05;
            spec.phi.bound_M = 1.5;
            spec.phi.bound_nu = 0.5;
            const PointSet ps = generate(spec, seed);
            const DeloneCertificate cert = delone_certificate(ps, U, 0.0);
            const IndexSets idx = index_sets(ps, U, cert, cert.r_packing / 4.0);
            const CountingReport rep = counting_check(ps, U, idx, cert, 0.0, 12);
            CHECK(rep.pass);
        }
    }
}
