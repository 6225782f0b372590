#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fraclab/capacity.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

/// The perforation: per-point obstacle node sets x_j^i + lambda_j * T with the
/// capacitary scale lambda_j = r_j^{n/(n-sp)}.
struct ObstacleFamily {
    PointSet points;
    CompactSetSpec T;
    double epsilon = 0.0;
    double r_j = 0.0;
    double lambda_j = 0.0;
    std::vector<std::vector<std::int64_t>> node_masks;  // grid node lists per point
    NodeMask combined;
    std::int64_t total_nodes = 0;
};

/// Builds the per-point obstacle masks on `grid`, enforcing the resolution
/// guard lambda_j >= 2h and the containment T_j^i inside the owning Voronoi
/// cell (checked through voronoi_index).
ObstacleFamily build_obstacles(const PointSet& lambda_points, const CompactSetSpec& T,
                               double r_j, const UniformGrid& grid, double epsilon_label,
                               double exponent_n_over_nmsp);

struct PerforatedProblem {
    Domain U = Domain::rect({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2);
    UniformGrid grid;
    FractionalKernel kernel;
    ObstacleFamily obstacles;
    ScalarField forcing;  // f on the grid
    int collar_width = 1;
    double cg_tol = 1e-8;
    int max_iterations = 20000;
};

struct MinimizationResult {
    double total = 0.0;         // energy + mass - forcing parts combined
    double energy_part = 0.0;   // Gagliardo energy of the minimizer
    double mass_part = 0.0;     // homogenized strange-term value (zero for perforated)
    double forcing_part = 0.0;  // h^n sum f u
    ScalarField minimizer;
    SolveStats stats;
};

MinimizationResult solve_perforated(const PerforatedProblem& prob,
                                    KernelConvolver* conv = nullptr);

struct HomogenizedProblem {
    Domain U = Domain::rect({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2);
    UniformGrid grid;
    FractionalKernel kernel;
    double theta = 0.25;
    double capT = 0.0;
    ScalarField beta;     // limit density on the grid
    ScalarField forcing;
    int collar_width = 1;
    double cg_tol = 1e-8;
    int max_iterations = 20000;
};

MinimizationResult solve_homogenized(const HomogenizedProblem& prob,
                                     KernelConvolver* conv = nullptr);

struct GammaStudyConfig {
    std::vector<double> epsilon_list{0.25, 1.0 / 6.0, 0.125};
    double s = 0.55;
    double p = 2.0;
    Anisotropy aniso;
    Point U_lo{0.0, 0.0, 0.0};
    Point U_hi{1.0, 1.0, 1.0};
    int dim = 2;
    GeneratorSpec::Kind lattice = GeneratorSpec::Kind::Cubic;
    double base_jitter = 0.3;
    Diffeomorphism phi;
    double r_factor = 0.5;  // r_j = r_factor * epsilon (must be <= packing factor)
    CompactSetSpec T = CompactSetSpec::ball(1.0);
    // forcing bump (normalized to unit mass)
    Point f_center{0.5, 0.5, 0.0};
    double f_width = 0.15;
    double f_mass = 1.0;
    // grid policy: h <= lambda_j / lambda_over_h, nodes clamped to [n_min, n_max]
    double lambda_over_h = 3.0;
    std::int64_t n_min = 64;
    std::int64_t n_max = 2048;
    std::vector<std::int64_t> grid_override;  // optional per-epsilon node counts
    std::int64_t hom_resolution = 0;          // 0: reuse the finest epsilon grid size
    // homogenized coefficients; negatives mean "derive"
    double capT_value = -1.0;  // < 0: from the capacity table
    double theta_value = -1.0; // < 0: analytic lattice value (#I r^n limit)
    double beta_constant = -1.0;  // < 0: 1 / L^n(U)
    std::int64_t cap_resolution = 192;
    std::vector<double> cap_r_list{2.0, 4.0, 8.0};
    double cap_R_ratio = 1.5;
    double threshold = 0.10;
    double cg_tol = 1e-8;
    int collar_width = 1;
    std::uint64_t seed = 1;
    bool keep_minimizers = false;
};

struct EpsilonRecord {
    double epsilon = 0.0;
    double h = 0.0;
    std::int64_t grid_n = 0;
    double m_total = 0.0;
    double m_energy = 0.0;
    double m_forcing = 0.0;
    double gap_rel = 0.0;
    double minimizer_distance = 0.0;  // L^p(U) distance to the homogenized minimizer
    int iterations = 0;
    double residual = 0.0;
    std::int64_t obstacle_nodes = 0;
};

struct ConvergenceStudy {
    std::vector<EpsilonRecord> records;
    double m_inf = 0.0;
    double m_inf_energy = 0.0;
    double m_inf_mass = 0.0;
    double m_inf_forcing = 0.0;
    double theta_used = 0.0;
    double capT_used = 0.0;
    double capT_uncertainty = 0.0;  // Cauchy gap of the capacity table
    double m_inf_band = 0.0;        // |dm_inf/dcapT| * capT_uncertainty (paired solve)
    std::int64_t hom_grid_n = 0;
    ScalarField hom_minimizer;
    std::vector<ScalarField> minimizers;  // kept when config.keep_minimizers
    bool gaps_nonincreasing = false;
    double final_gap = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

/// The epsilon-sweep: perforated minima vs the homogenized limit. The pass
/// threshold is an engineering choice, recorded as such in the note.
ConvergenceStudy gamma_study(const GammaStudyConfig& config);

struct SlicingSelection {
    int h_selected = 1;  // 1-based shell index
    std::vector<double> shell_defects;
    double total_defect = 0.0;
    bool pigeonhole_ok = false;  // N * min <= sum, evaluated in extended precision
    double rho = 0.0;            // m^{-3 h_selected} r_j
};

/// Shell defect scan: concentric shells A^h = union_i B(x_i, r q^h) minus the
/// next ball, h = 1..N, with ratio q = m^{-3} by default (the joining-lemma
/// family) or any q in (0,1) (e.g. 1/2 for plain dyadic shells); selects the
/// defect-minimizing shell. The 1/N bound is a pigeonhole statement and is
/// asserted exactly.
SlicingSelection slicing_select(const ScalarField& u, const PointSet& lambda_points,
                                const std::vector<int>& interior_labels, double r_j, int m,
                                int N, const FractionalKernel& kernel,
                                KernelConvolver* conv = nullptr, double shell_ratio = 0.0);

struct JoiningResult {
    ScalarField w;
    std::vector<double> z_values;        // one constant per interior point
    int h_used = 1;
    double rho = 0.0;
    double measured_error = 0.0;  // |D(w, UxU) - D(u, UxU)|
    double bound_rhs = 0.0;       // defect + m^{2p} rho^{-sp} sum ||u - z||_p^p term
    double fitted_c = 0.0;        // measured / bound
    bool plateau_exact = false;   // w = z_i on the inner annuli, nodewise
    bool off_support_exact = false;  // w = u off the joining annuli, nodewise
};

/// Cutoff-joining construction: w = sum phi_i z_i + (1 - sum phi_i) u with
/// radial cutoffs of Lipschitz constant <= 2 m^2 / rho between the slicing
/// annuli. z_values defaults to the annulus means of u.
JoiningResult apply_joining(const ScalarField& u, const PointSet& lambda_points,
                            const std::vector<int>& interior_labels, double r_j, int m, int N,
                            const std::vector<double>* z_values, const FractionalKernel& kernel,
                            KernelConvolver* conv = nullptr);

struct RecoveryResult {
    ScalarField u_j;
    double F_j = 0.0;      // perforated energy of the competitor
    double F_limit = 0.0;  // homogenized energy of the target
    double ratio = 0.0;
    bool feasible = false;      // u_j = 0 on every obstacle node
    double sup_ratio = 0.0;     // max|u_j| / max|u|
    int h_used = 1;
    int N = 0;
};

/// The three-branch recovery competitor: joined field away from the points,
/// capacity-profile correction (1 - xi_N((x - x_i)/lambda)) u_i on interior
/// balls, boundary cutoff (1 - zeta) w on boundary-index balls. shell_levels
/// is the slicing depth; profile_N the truncation radius of xi_profile (the
/// support ball of the stored potential). The profile must fit inside the
/// replacement balls: profile_N * lambda_j <= rho / m.
RecoveryResult build_recovery(const ScalarField& u_smooth, const ObstacleFamily& family,
                              const Domain& U, const IndexSets& idx, int shell_levels,
                              double profile_N, const ScalarField& xi_profile, double theta,
                              double capT, double beta_constant,
                              const FractionalKernel& kernel,
                              KernelConvolver* conv = nullptr);

/// Grid-size policy for an epsilon: smallest node count with
/// h <= lambda / ratio, clamped and validity-checked against the 2h guard.
std::int64_t grid_nodes_for_epsilon(const GammaStudyConfig& config, double epsilon);

}  // namespace fraclab
