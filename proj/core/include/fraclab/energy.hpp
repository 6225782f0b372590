#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fraclab/convolve.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/kernel.hpp"

namespace fraclab {

/// Product region E = rows x cols of node pairs, optionally intersected with
/// the diagonal band {|x-y| < diag_band} (or its complement).
struct PairRegion {
    NodeMask rows;
    NodeMask cols;
    std::optional<double> diag_band;
    bool band_complement = false;

    static PairRegion square(const NodeMask& m) { return PairRegion{m, m, std::nullopt, false}; }
};

/// Discrete Gagliardo-type energy
///   h^{2n} sum_{x in rows, y in cols, x != y} K(x-y) |u(x)-u(y)|^p.
/// Row sums are accumulated in a fixed order and combined by a pairwise tree,
/// so the value is bit-reproducible across thread counts. cutoff_radius > 0
/// drops pairs with |x-y| > cutoff (direct path only); the neglected tail per
/// row is bounded by the homogeneous-kernel tail integral, reported via
/// energy_cutoff_tail_bound().
double gagliardo_energy(const ScalarField& u, const FractionalKernel& k, const PairRegion& E,
                        double cutoff_radius = 0.0);

/// Upper bound on the energy neglected by a cutoff radius: for each row node,
/// 2^{p-1} alpha (|u(x)|^p + max|u|^p) n omega_n / (sp) * cutoff^{-sp}.
double energy_cutoff_tail_bound(const ScalarField& u, const FractionalKernel& k,
                                const NodeMask& rows, double cutoff_radius);

/// p = 2 fast path for the symmetric region mask x mask, evaluated with two
/// FFT convolutions; agrees with the direct sum to ~1e-12 relative.
double gagliardo_energy_fft(const ScalarField& u, const FractionalKernel& k, const NodeMask& mask,
                            KernelConvolver& conv);

/// Locality defect D(u, A x B) for disjoint node sets; throws on overlap.
double locality_defect(const ScalarField& u, const FractionalKernel& k, const NodeMask& A,
                       const NodeMask& B);

/// p = 2 locality defect via three convolutions (no disjointness check beyond
/// the caller's); used where the direct pair sum is too large.
double locality_defect_fft(const ScalarField& u, const FractionalKernel& k, const NodeMask& A,
                           const NodeMask& B, KernelConvolver& conv);

enum class OperatorMethod { Fft, Direct };

/// Nonlocal operator (half the gradient of the double-sum energy):
///   v(x) = p h^{2n} sum_{y in mask, y != x} K(x-y) |u(x)-u(y)|^{p-2} (u(x)-u(y))
/// on mask nodes, zero elsewhere. The FFT path requires p = 2 and computes the
/// same value via circular convolution on the padded grid, then corrects masks.
ScalarField apply_operator(const ScalarField& u, const FractionalKernel& k, const NodeMask& mask,
                           OperatorMethod method, KernelConvolver* conv = nullptr,
                           double cutoff_radius = 0.0);

struct AdamsReport {
    int regime = 0;           // 1: nu in (0,n), 2: nu in (n,inf)
    double quadrature = 0.0;  // h^n sum_{x in O} |x-z|^{-nu}
    double bound = 0.0;       // explicit-constant right-hand side
    double constant = 0.0;    // the explicit constant used
    double set_measure = 0.0;
    double distance = 0.0;
    bool pass = false;
};

/// Singular-kernel quadrature against the explicit Cavalieri constants:
/// regime (i) needs dist(z, O) = 0 (z inside the discrete set), regime (ii)
/// needs nu > n and positive distance.
AdamsReport adams_bound_check(const UniformGrid& g, const NodeMask& O, const Point& z, double nu);

struct PoincareHardyReport {
    // max over the random-field family
    double poincare_wirtinger_max = 0.0;
    double poincare_max = 0.0;
    double hardy_max = 0.0;
    int vacuous_fields = 0;  // constant fields where the PW ratio is 0/0
    // dyadic radius sweep of the PW ratio for a fixed bump
    std::vector<double> sweep_radii;
    std::vector<double> sweep_ratios;
    double fitted_slope = 0.0;
    double expected_slope = 0.0;  // sp
    bool slope_ok = false;
    bool ratios_finite = false;
};

/// Empirical Poincare-Wirtinger / Poincare / Hardy ratios on a ball of radius
/// ball_radius, over n_fields seeded random exterior-zero fields, plus the
/// r^{sp} scaling sweep for a fixed bump on radii {r, r/2, r/4}. p = 2 only
/// (the ratios need the FFT energy path at usable resolutions).
PoincareHardyReport poincare_hardy_probe(const FractionalKernel& k, double ball_radius,
                                         std::int64_t resolution, int n_fields,
                                         std::uint64_t seed);

}  // namespace fraclab
