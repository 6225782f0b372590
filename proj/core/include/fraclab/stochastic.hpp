#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/homogenize.hpp"

namespace fraclab {

/// Site-indexed stationary radius process: rho_i uniform on [rho_min, rho_max]
/// (a point mass when the endpoints coincide), read from a counter-based
/// stream keyed by (seed, site). A lattice shift acts on the site argument, so
/// gamma(i + k, omega) = gamma(i, tau_k omega) holds bit-exactly.
struct StationaryProcess {
    std::uint64_t base_seed = 1;
    double rho_min = 0.5;
    double rho_max = 1.0;
    double cap_unit = 1.0;  // capacity of the unit ball under the working kernel
    double n_minus_sp = 0.9;

    double rho(std::int64_t i, std::int64_t j, std::int64_t shift_i = 0,
               std::int64_t shift_j = 0) const;
    double gamma(std::int64_t i, std::int64_t j, std::int64_t shift_i = 0,
                 std::int64_t shift_j = 0) const;
    double gamma_bound() const;  // gamma_0
    double mean_gamma() const;   // analytic E[gamma]
    double sd_gamma() const;     // analytic sd of gamma

    /// E[rho^a] for the uniform law, in closed form.
    double rho_moment(double a) const;
};

struct ErgodicWindowCheck {
    double q_lo0, q_lo1, q_hi0, q_hi1;  // test rectangle
    double weighted_integral = 0.0;     // integral of Psi_j over the rectangle
    double expected = 0.0;              // E[gamma] * area
    double tolerance = 0.0;
    bool pass = false;
};

struct ErgodicSeedRecord {
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::int64_t n_sites = 0;
    double mean = 0.0;
    double gate = 0.0;  // 4 sigma / sqrt(N)
    bool mean_ok = false;
    std::vector<ErgodicWindowCheck> windows;
    bool windows_ok = false;
};

struct ErgodicReport {
    double expected_gamma = 0.0;
    double sd = 0.0;
    std::vector<ErgodicSeedRecord> records;  // per (seed, epsilon)
    int seeds = 0;
    int seed_failures = 0;  // seeds failing at the finest epsilon
    bool pass = false;      // <= 1 failing seed tolerated
};

/// Spatial means of gamma over interior indices of V against the analytic
/// expectation, plus the weighted weak* check on 5 test rectangles.
ErgodicReport ergodic_average(const StationaryProcess& proc, const Domain& V,
                              const std::vector<double>& epsilon_list, int n_seeds = 5);

struct SeparationReport {
    std::vector<double> epsilons;
    std::vector<double> delta_over_eps;        // must trend to 0
    std::vector<double> eps_power_over_delta;  // must stay bounded
    bool containment = false;
    bool small_o = false;
    bool big_O = false;
    bool pass = false;
    std::string note;
};

/// (O3) checks for delta_j = eps^delta_exponent: containment of the random
/// obstacle in the shrunken cell and the two sequence asymptotics.
SeparationReport separation_check(const StationaryProcess& proc, double delta_exponent,
                                  const std::vector<double>& epsilon_list, int dim, double sp);

enum class RandomDeloneKind { PerturbedLattice, StochasticDiffeoOutside, StochasticDiffeoInside };

struct RandomDeloneParams {
    RandomDeloneKind kind = RandomDeloneKind::PerturbedLattice;
    int dim = 2;
    double epsilon = 0.125;
    BBox box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2};
    double margin = -1.0;
    double M = 0.4;            // perturbed lattice: sup-norm bound of the site offsets (< 1)
    double dimer = 0.15;       // diffeo-inside: deterministic 2-periodic displacement
    double jitter = 0.15;      // diffeo-inside: random site displacement
    double outside_amp = 0.1;  // diffeo-outside: per-omega amplitude scale
    double outside_shear = 0.1;
};

struct RandomDeloneReport {
    PointSet points;
    DeloneCertificate certificate;
    bool stationarity_applicable = false;
    bool stationarity_exact = false;  // (e:statlatt) bit-exact under index shifts
    double delta_j = 0.0;             // translation step per unit shift
    double theta_hat = 0.0;
    double beta_l1_to_uniform = 0.0;
    std::string note;
};

/// Draws a random Delone set, certifies it, runs the sequential-stationarity
/// identity in index space (bit-exact by construction for the applicable
/// kinds), and estimates the limit data.
RandomDeloneReport random_delone(const RandomDeloneParams& params, std::uint64_t seed,
                                 const Domain& U);

struct RandomGammaConfig {
    std::vector<double> epsilon_list{1.0 / 3.0, 0.25, 1.0 / 6.0};
    double s = 0.55;
    double p = 2.0;
    int dim = 2;
    Point U_lo{0.0, 0.0, 0.0};
    Point U_hi{1.0, 1.0, 1.0};
    double rho_min = 0.7;
    double rho_max = 1.1;
    double cap_unit = -1.0;  // < 0: compute from the capacity table
    std::vector<std::uint64_t> omega_seeds{11, 22, 33};
    Point f_center{0.5, 0.5, 0.0};
    double f_width = 0.15;
    double f_mass = 1.0;
    double lambda_over_h = 2.0;
    std::int64_t n_min = 64;
    std::int64_t n_max = 1024;
    double cg_tol = 1e-8;
    int collar_width = 1;
    std::int64_t cap_resolution = 160;
    // Non-ergodic negative control: mixture of two radius laws selected by a
    // global per-omega coin.
    bool mixture = false;
    double mix_lo_min = 0.5, mix_lo_max = 0.7;
    double mix_hi_min = 1.0, mix_hi_max = 1.2;
};

struct RandomGammaCell {
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double m_value = 0.0;
    double gap_rel = 0.0;
    std::int64_t grid_n = 0;
};

struct RandomGammaReport {
    std::vector<RandomGammaCell> cells;
    double m_inf = 0.0;
    double expected_gamma = 0.0;
    double cross_seed_spread_finest = 0.0;  // max - min of m at finest epsilon
    double mean_gap_finest = 0.0;
    bool deterministic_limit_ok = false;  // spread below the epsilon-gap
    // mixture control:
    bool bimodal = false;
    double cluster_separation = 0.0;
    double cluster_spread = 0.0;
};

/// Random-obstacle epsilon sweep over several omega seeds; the homogenized
/// target carries the mass coefficient E[gamma] (iid sites => ergodic shifts).
RandomGammaReport random_gamma_study(const RandomGammaConfig& config);

/// Discrete check of the capacitary scaling law: cap(sigma * B_rho) compared
/// with sigma^{n - sp} cap(B_rho) on one grid.
struct CapacityScalingCheck {
    double ratio = 0.0;  // should be 1 within a few percent
    bool pass = false;
};
CapacityScalingCheck capacity_scaling_check(double rho, double sigma,
                                            const FractionalKernel& kernel,
                                            std::int64_t resolution);

}  // namespace fraclab
