#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fraclab/stochastic.hpp"

using namespace fraclab;

namespace {

StationaryProcess uniform_process(std::uint64_t seed = 1) {
    StationaryProcess p;
    p.base_seed = seed;
    p.rho_min = 0.5;
    p.rho_max = 1.0;
    p.cap_unit = 3.0;
    p.n_minus_sp = 0.9;
    return p;
}

}  // namespace

TEST_CASE("stationarity of the radius process is exact") {
    const StationaryProcess p = uniform_process(42);
    for (std::int64_t k0 : {1, -3, 7})
        for (std::int64_t k1 : {0, 2, -5})
            for (std::int64_t i = -4; i <= 4; ++i)
                for (std::int64_t j = -4; j <= 4; ++j) {
                    // gamma(i + k, omega) == gamma(i, tau_k omega), bitwise
                    CHECK(p.gamma(i + k0, j + k1) == p.gamma(i, j, k0, k1));
                }
}

TEST_CASE("gamma is bounded by gamma_0") {
    const StationaryProcess p = uniform_process(3);
    const double g0 = p.gamma_bound();
    for (std::int64_t i = -20; i <= 20; ++i)
        for (std::int64_t j = -20; j <= 20; ++j) CHECK(p.gamma(i, j) <= g0);
}

TEST_CASE("closed-form moment matches quadrature") {
    const StationaryProcess p = uniform_process();
    const double a = p.n_minus_sp;
    // midpoint quadrature of E[rho^a] over the uniform law
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = p.rho_min + (p.rho_max - p.rho_min) * (i + 0.5) / n;
        acc += std::pow(r, a);
    }
    acc /= n;
    CHECK(p.rho_moment(a) == doctest::Approx(acc).epsilon(1e-8));
    CHECK(p.mean_gamma() == doctest::Approx(p.cap_unit * acc).epsilon(1e-8));
}

TEST_CASE("point-mass law gives the expectation exactly") {
    StationaryProcess p = uniform_process();
    p.rho_min = p.rho_max = 0.8;
    const Domain V = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const ErgodicReport rep = ergodic_average(p, V, {1.0 / 16.0}, 3);
    for (const auto& rec : rep.records) {
        CHECK(rec.mean == doctest::Approx(p.mean_gamma()).epsilon(1e-14));
        CHECK(rec.mean_ok);
        CHECK(rec.windows_ok);
    }
    CHECK(rep.pass);
}

TEST_CASE("ergodic gate holds for the uniform law at N = 1e4") {
    const StationaryProcess p = uniform_process(2024);
    const Domain V = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    const ErgodicReport rep = ergodic_average(p, V, {1.0 / 50.0, 1.0 / 100.0}, 5);
    // finest epsilon 1/100 -> ~ 99^2 ~ 1e4 sites
    int fails = 0;
    for (const auto& rec : rep.records)
        if (rec.epsilon == 1.0 / 100.0 && !(rec.mean_ok && rec.windows_ok)) ++fails;
    CHECK(fails <= 1);
    CHECK(rep.pass);
}

TEST_CASE("disjoint translated windows agree within the gate") {
    const StationaryProcess p = uniform_process(77);
    const double eps = 1.0 / 64.0;
    const Domain v1 = Domain::rect({0, 0, 0}, {0.5, 1, 0}, 2);
    const Domain v2 = Domain::rect({0.5, 0, 0}, {1, 1, 0}, 2);
    const ErgodicReport r1 = ergodic_average(p, v1, {eps}, 1);
    const ErgodicReport r2 = ergodic_average(p, v2, {eps}, 1);
    const double gate = r1.records[0].gate + r2.records[0].gate;
    CHECK(std::abs(r1.records[0].mean - r2.records[0].mean) <= gate);
}

TEST_CASE("separation sequences") {
    const StationaryProcess p = uniform_process();
    const std::vector<double> eps{0.25, 0.125, 1.0 / 16.0};
    SUBCASE("default exponent 1.3 passes with small rho") {
        StationaryProcess small = p;
        small.rho_max = 0.35;
        const SeparationReport rep = separation_check(small, 1.3, eps, 2, 1.1);
        CHECK(rep.containment);
        CHECK(rep.small_o);
        CHECK(rep.big_O);
        CHECK(rep.pass);
    }
    SUBCASE("delta = eps violates the small-o condition") {
        const SeparationReport rep = separation_check(p, 1.0, eps, 2, 1.1);
        CHECK_FALSE(rep.small_o);
        CHECK_FALSE(rep.pass);
        CHECK(rep.note == "delta_j = o(eps_j) violated");
    }
    SUBCASE("delta = eps^2 keeps the big-O condition") {
        // eps^{1 + n/(n-sp)} = eps^{3.22} = O(eps^2): ratios shrink
        StationaryProcess small = p;
        small.rho_max = 0.2;
        const SeparationReport rep = separation_check(small, 2.0, eps, 2, 1.1);
        CHECK(rep.big_O);
        CHECK(rep.small_o);
    }
}

TEST_CASE("random Delone generators") {
    const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
    SUBCASE("zero perturbation reproduces the cubic lattice") {
        RandomDeloneParams prm;
        prm.kind = RandomDeloneKind::PerturbedLattice;
        prm.M = 0.0;
        prm.epsilon = 0.125;
        const RandomDeloneReport rep = random_delone(prm, 5, U);
        CHECK(rep.certificate.r_packing == doctest::Approx(0.0625).epsilon(1e-12));
        CHECK(rep.stationarity_exact);
        CHECK(rep.theta_hat > 0.0);
    }
    SUBCASE("perturbed lattice: exact sequential stationarity") {
        RandomDeloneParams prm;
        prm.kind = RandomDeloneKind::PerturbedLattice;
        prm.M = 0.4;
        prm.epsilon = 1.0 / 12.0;  // non-dyadic spacing still bit-exact
        const RandomDeloneReport rep = random_delone(prm, 17, U);
        CHECK(rep.stationarity_applicable);
        CHECK(rep.stationarity_exact);
        CHECK(rep.delta_j == doctest::Approx(prm.epsilon));
        CHECK(rep.certificate.r_packing > 0.0);
    }
    SUBCASE("perturbation bound M >= 1 is rejected") {
        RandomDeloneParams prm;
        prm.M = 1.0;
        CHECK_THROWS_AS(random_delone(prm, 1, U), Error);
    }
    SUBCASE("stationary diffeo (inside): invariant set, flat density trend") {
        RandomDeloneParams prm;
        prm.kind = RandomDeloneKind::StochasticDiffeoInside;
        prm.epsilon = 1.0 / 24.0;
        prm.dimer = 0.0;  // identity deterministic part
        prm.jitter = 0.12;
        const RandomDeloneReport rep = random_delone(prm, 23, U);
        CHECK(rep.stationarity_exact);
        CHECK(rep.delta_j == 0.0);
        CHECK(rep.beta_l1_to_uniform <= 0.25);
    }
    SUBCASE("outside diffeo reports without the stationarity check") {
        RandomDeloneParams prm;
        prm.kind = RandomDeloneKind::StochasticDiffeoOutside;
        prm.epsilon = 1.0 / 16.0;
        const RandomDeloneReport rep = random_delone(prm, 31, U);
        CHECK_FALSE(rep.stationarity_applicable);
        CHECK(rep.certificate.r_packing > 0.0);
    }
}

TEST_CASE("capacitary scaling law holds discretely") {
    const FractionalKernel k(2, 0.55, 2.0);
    const CapacityScalingCheck chk = capacity_scaling_check(0.4, 0.5, k, 192);
    CHECK(chk.pass);
    CHECK(chk.ratio == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("random gamma study: deterministic limit evidence") {
    RandomGammaConfig cfg;
    cfg.epsilon_list = {1.0 / 3.0, 0.25};
    cfg.omega_seeds = {11, 22, 33};
    cfg.lambda_over_h = 2.0;
    cfg.n_max = 640;
    cfg.cap_resolution = 96;
    const RandomGammaReport rep = random_gamma_study(cfg);
    REQUIRE(rep.cells.size() == 6);
    CHECK(rep.expected_gamma > 0.0);
    CHECK(rep.cross_seed_spread_finest >= 0.0);
    CHECK(rep.deterministic_limit_ok);

    SUBCASE("point-mass law: all seeds coincide") {
        RandomGammaConfig pm = cfg;
        pm.rho_min = pm.rho_max = 0.9;
        pm.epsilon_list = {1.0 / 3.0};
        const RandomGammaReport r2 = random_gamma_study(pm);
        double lo = 1e300, hi = -1e300;
        for (const auto& c : r2.cells) {
            lo = std::min(lo, c.m_value);
            hi = std::max(hi, c.m_value);
        }
        CHECK(hi - lo == 0.0);  // identical obstacle families across seeds
    }
}

TEST_CASE("non-ergodic mixture splits the minima into two clusters") {
    RandomGammaConfig cfg;
    cfg.epsilon_list = {0.25};
    cfg.omega_seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    cfg.mixture = true;
    cfg.lambda_over_h = 2.0;
    cfg.n_max = 512;
    cfg.cap_resolution = 96;
    const RandomGammaReport rep = random_gamma_study(cfg);
    CHECK(rep.bimodal);
    CHECK(rep.cluster_separation > 3.0 * rep.cluster_spread);
}
