#include "fraclab/homogenize.hpp"

#include <algorithm>
#include <cmath>

#include "fraclab/parallel.hpp"

namespace fraclab {

namespace {

double pow_abs_p(double t, double p) { return p == 2.0 ? t * t : std::pow(std::abs(t), p); }

/// Nodes of `grid` within L-inf range `reach` of point x (index window scan).
template <typename F>
void for_nodes_near(const UniformGrid& g, const Point& x, double reach, F&& f) {
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        lo[d] = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(std::floor((x[d] - reach - g.lo[d]) / g.h - 0.5)));
        hi[d] = std::min<std::int64_t>(
            g.shape[d] - 1,
            static_cast<std::int64_t>(std::ceil((x[d] + reach - g.lo[d]) / g.h - 0.5)));
    }
    for (std::int64_t k = (g.dim == 3 ? lo[2] : 0); k <= (g.dim == 3 ? hi[2] : 0); ++k)
        for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
            for (std::int64_t i = lo[0]; i <= hi[0]; ++i) f(g.index(i, j, k));
}

ScalarField constant_field(const UniformGrid& g, double v) {
    ScalarField f = ScalarField::zeros(g);
    std::fill(f.values.begin(), f.values.end(), v);
    return f;
}

}  // namespace

ObstacleFamily build_obstacles(const PointSet& lambda_points, const CompactSetSpec& T,
                               double r_j, const UniformGrid& grid, double epsilon_label,
                               double exponent_n_over_nmsp) {
    for (int d = 0; d < grid.dim; ++d)
        if (T.center[d] != 0.0)
            throw Error("homogenization", "obstacle template must be centered at the origin");
    const double rp = packing_radius(lambda_points);
    if (r_j > rp * (1.0 + 1e-12))
        throw Error("homogenization", "need r_j <= packing radius of the point family");

    ObstacleFamily fam;
    fam.points = lambda_points;
    fam.T = T;
    fam.epsilon = epsilon_label;
    fam.r_j = r_j;
    fam.lambda_j = std::pow(r_j, exponent_n_over_nmsp);
    if (fam.lambda_j < 2.0 * grid.h)
        throw Error("homogenization",
                    "resolution guard violated: lambda_j = " + std::to_string(fam.lambda_j) +
                        " needs h <= " + std::to_string(0.5 * fam.lambda_j) + ", have h = " +
                        std::to_string(grid.h));

    const double reach = fam.lambda_j * std::max(T.outer_radius(grid.dim), 1.0);
    const BBox gbox = grid.box();
    fam.node_masks.resize(lambda_points.size());
    fam.combined.assign(grid.size(), 0);

    for (std::size_t pi = 0; pi < lambda_points.size(); ++pi) {
        const Point& x = lambda_points.points[pi];
        bool near_grid = true;
        for (int d = 0; d < grid.dim; ++d)
            if (x[d] < gbox.lo[d] - reach || x[d] > gbox.hi[d] + reach) near_grid = false;
        if (!near_grid) continue;
        auto& mask = fam.node_masks[pi];
        for_nodes_near(grid, x, reach, [&](std::int64_t node) {
            const Point p = grid.node(node);
            Point q{};
            for (int d = 0; d < grid.dim; ++d) q[d] = (p[d] - x[d]) / fam.lambda_j;
            if (T.contains(q, grid.dim)) mask.push_back(node);
        });
        if (mask.empty()) continue;
        // Containment in the owning Voronoi cell, via the nearest-point rule.
        for (std::int64_t node : mask) {
            if (voronoi_index(lambda_points, grid.node(node)) !=
                lambda_points.labels[pi])
                throw Error("homogenization",
                            "obstacle node escapes its Voronoi cell (r_j too large?)");
            fam.combined[node] = 1;
        }
        // Fully-inside obstacles must contain a whole grid cell.
        bool inside_grid = true;
        for (int d = 0; d < grid.dim; ++d)
            if (x[d] - reach < gbox.lo[d] || x[d] + reach > gbox.hi[d]) inside_grid = false;
        if (inside_grid) {
            bool has_full_cell = false;
            const double half = 0.5 * grid.h;
            for (std::int64_t node : mask) {
                const Point c = grid.node(node);
                bool full = true;
                for (int corner = 0; corner < (1 << grid.dim) && full; ++corner) {
                    Point q{};
                    for (int d = 0; d < grid.dim; ++d) {
                        const double coord = c[d] + (((corner >> d) & 1) ? half : -half);
                        q[d] = (coord - x[d]) / fam.lambda_j;
                    }
                    full = T.contains(q, grid.dim);
                }
                if (full) {
                    has_full_cell = true;
                    break;
                }
            }
            if (!has_full_cell)
                throw Error("homogenization",
                            "obstacle under-resolved: no full grid cell inside T_j^i");
        }
    }
    fam.total_nodes = mask_count(fam.combined);
    return fam;
}

MinimizationResult solve_perforated(const PerforatedProblem& prob, KernelConvolver* conv) {
    const UniformGrid& g = prob.grid;
    const NodeMask in_u = mask_in_domain(g, prob.U);
    const NodeMask collar = mask_boundary_collar(g, prob.U, prob.collar_width);
    NodeMask constrained = mask_or(collar, prob.obstacles.combined);
    const NodeMask free_mask = mask_and_not(in_u, constrained);
    const double hn = std::pow(g.h, g.dim);

    MinimizationResult out;
    out.minimizer = ScalarField::zeros(g);

    std::unique_ptr<KernelConvolver> own;
    if (!conv) {
        own = std::make_unique<KernelConvolver>(g, prob.kernel);
        conv = own.get();
    }

    if (prob.kernel.p == 2.0) {
        QuadraticNonlocalProblem q;
        q.grid = g;
        q.kernel = prob.kernel;
        q.window = in_u;
        q.free_mask = free_mask;
        q.fixed_values.assign(g.size(), 0.0);
        q.linear.assign(g.size(), 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (free_mask[i]) q.linear[i] = hn * prob.forcing.values[i];
        out.stats = solve_quadratic(q, out.minimizer, prob.cg_tol, prob.max_iterations,
                                    Preconditioner::Circulant, conv);
        if (!out.stats.converged)
            throw Error("homogenization", "perforated solve did not converge: residual " +
                                              std::to_string(out.stats.rel_residual));
    } else {
        ObstacleEnergyProblem op;
        op.grid = g;
        op.kernel = prob.kernel;
        op.window = in_u;
        op.zero_mask = constrained;
        op.lower_one_mask.assign(g.size(), 0);
        op.linear.assign(g.size(), 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (in_u[i]) op.linear[i] = hn * prob.forcing.values[i];
        out.stats = projected_gradient(op, out.minimizer, 1e-10, prob.max_iterations);
        if (!out.stats.converged)
            throw Error("homogenization", "perforated projected gradient did not converge");
    }

    if (prob.kernel.p == 2.0)
        out.energy_part = gagliardo_energy_fft(out.minimizer, prob.kernel, in_u, *conv);
    else
        out.energy_part =
            gagliardo_energy(out.minimizer, prob.kernel, PairRegion::square(in_u));
    std::vector<double> fu(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (in_u[i]) fu[i] = prob.forcing.values[i] * out.minimizer.values[i];
    out.forcing_part = hn * pairwise_sum(fu);
    out.mass_part = 0.0;
    out.total = out.energy_part - out.forcing_part;
    return out;
}

MinimizationResult solve_homogenized(const HomogenizedProblem& prob, KernelConvolver* conv) {
    const UniformGrid& g = prob.grid;
    const NodeMask in_u = mask_in_domain(g, prob.U);
    const NodeMask collar = mask_boundary_collar(g, prob.U, prob.collar_width);
    const NodeMask free_mask = mask_and_not(in_u, collar);
    const double hn = std::pow(g.h, g.dim);

    MinimizationResult out;
    out.minimizer = ScalarField::zeros(g);

    std::unique_ptr<KernelConvolver> own;
    if (!conv) {
        own = std::make_unique<KernelConvolver>(g, prob.kernel);
        conv = own.get();
    }

    std::vector<double> mass(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (in_u[i]) mass[i] = prob.theta * prob.capT * hn * prob.beta.values[i];

    if (prob.kernel.p == 2.0) {
        QuadraticNonlocalProblem q;
        q.grid = g;
        q.kernel = prob.kernel;
        q.window = in_u;
        q.free_mask = free_mask;
        q.fixed_values.assign(g.size(), 0.0);
        q.mass = mass;
        q.linear.assign(g.size(), 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (free_mask[i]) q.linear[i] = hn * prob.forcing.values[i];
        out.stats = solve_quadratic(q, out.minimizer, prob.cg_tol, prob.max_iterations,
                                    Preconditioner::Circulant, conv);
        if (!out.stats.converged)
            throw Error("homogenization", "homogenized solve did not converge: residual " +
                                              std::to_string(out.stats.rel_residual));
    } else {
        ObstacleEnergyProblem op;
        op.grid = g;
        op.kernel = prob.kernel;
        op.window = in_u;
        op.zero_mask = collar;
        op.lower_one_mask.assign(g.size(), 0);
        op.mass = mass;
        op.mass_exponent = prob.kernel.p;
        op.linear.assign(g.size(), 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (in_u[i]) op.linear[i] = hn * prob.forcing.values[i];
        out.stats = projected_gradient(op, out.minimizer, 1e-10, prob.max_iterations);
        if (!out.stats.converged)
            throw Error("homogenization", "homogenized projected gradient did not converge");
    }

    if (prob.kernel.p == 2.0)
        out.energy_part = gagliardo_energy_fft(out.minimizer, prob.kernel, in_u, *conv);
    else
        out.energy_part =
            gagliardo_energy(out.minimizer, prob.kernel, PairRegion::square(in_u));
    std::vector<double> fu(g.size(), 0.0), mu(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (in_u[i]) {
            fu[i] = prob.forcing.values[i] * out.minimizer.values[i];
            mu[i] = mass[i] * pow_abs_p(out.minimizer.values[i], prob.kernel.p);
        }
    out.forcing_part = hn * pairwise_sum(fu);
    out.mass_part = pairwise_sum(mu);
    out.total = out.energy_part + out.mass_part - out.forcing_part;
    return out;
}

std::int64_t grid_nodes_for_epsilon(const GammaStudyConfig& config, double epsilon) {
    const double extent = config.U_hi[0] - config.U_lo[0];
    const double r_j = config.r_factor * epsilon;
    const double lambda = std::pow(r_j, config.dim / (config.dim - config.s * config.p));
    auto n = static_cast<std::int64_t>(
        std::ceil(extent * config.lambda_over_h / lambda));
    n = std::clamp(n, config.n_min, config.n_max);
    const double h = extent / static_cast<double>(n);
    if (lambda < 2.0 * h)
        throw Error("homogenization",
                    "resolution guard unreachable within n_max: epsilon = " +
                        std::to_string(epsilon) + " needs " +
                        std::to_string(static_cast<std::int64_t>(
                            std::ceil(2.0 * extent / lambda))) +
                        " nodes per axis");
    return n;
}

namespace {

ScalarField forcing_bump(const UniformGrid& g, const NodeMask& in_u, const Point& center,
                         double width, double mass) {
    ScalarField f = ScalarField::zeros(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (in_u[i])
            f.values[i] = std::exp(-dist2(g.node(i), center, g.dim) / (width * width));
    const double hn = std::pow(g.h, g.dim);
    double total = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) total += f.values[i];
    total *= hn;
    if (total > 0.0)
        for (auto& v : f.values) v *= mass / total;
    return f;
}

double lp_distance(const ScalarField& coarse, const ScalarField& reference,
                   const NodeMask& in_u, double p) {
    // Interpolates the coarse minimizer onto the reference grid.
    const UniformGrid& g = reference.grid;
    std::vector<double> terms(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (in_u[i]) {
            const double d = interpolate(coarse, g.node(i)) - reference.values[i];
            terms[i] = pow_abs_p(d, p);
        }
    return std::pow(std::pow(g.h, g.dim) * pairwise_sum(terms), 1.0 / p);
}

}  // namespace

ConvergenceStudy gamma_study(const GammaStudyConfig& config) {
    if (config.epsilon_list.empty())
        throw Error("homogenization", "epsilon_list must be nonempty");
    for (std::size_t i = 1; i < config.epsilon_list.size(); ++i)
        if (config.epsilon_list[i] >= config.epsilon_list[i - 1])
            throw Error("homogenization", "epsilon_list must decrease");

    const FractionalKernel kernel(config.dim, config.s, config.p, config.aniso);
    const Domain U = Domain::rect(config.U_lo, config.U_hi, config.dim);
    const double exponent = config.dim / (config.dim - config.s * config.p);

    ConvergenceStudy study;
    study.threshold = config.threshold;
    study.note =
        "pass threshold " + std::to_string(config.threshold) +
        " is an engineering choice; no convergence rate is available for the minima gap";

    // Strange-term coefficient from the capacity table unless pinned.
    if (config.capT_value >= 0.0) {
        study.capT_used = config.capT_value;
        study.capT_uncertainty = 0.0;
    } else {
        const CapacityTable table =
            capacity_limit_table(config.T, config.cap_r_list, config.cap_R_ratio, kernel,
                                 config.cap_resolution);
        study.capT_used = table.cap_estimate;
        study.capT_uncertainty = table.cauchy_gap;
    }
    study.theta_used = config.theta_value >= 0.0
                           ? config.theta_value
                           : U.measure() * std::pow(config.r_factor, config.dim);
    const double beta_c =
        config.beta_constant >= 0.0 ? config.beta_constant : 1.0 / U.measure();

    // Per-epsilon grids, finest first resolved for the homogenized reference.
    std::vector<std::int64_t> grid_n(config.epsilon_list.size());
    for (std::size_t e = 0; e < config.epsilon_list.size(); ++e)
        grid_n[e] = e < config.grid_override.size() && config.grid_override[e] > 0
                        ? config.grid_override[e]
                        : grid_nodes_for_epsilon(config, config.epsilon_list[e]);

    study.hom_grid_n = config.hom_resolution > 0 ? config.hom_resolution
                                                 : *std::max_element(grid_n.begin(), grid_n.end());
    const UniformGrid hom_grid = UniformGrid::over(U.bbox(), study.hom_grid_n);
    const NodeMask hom_in_u = mask_in_domain(hom_grid, U);

    HomogenizedProblem hom;
    hom.U = U;
    hom.grid = hom_grid;
    hom.kernel = kernel;
    hom.theta = study.theta_used;
    hom.capT = study.capT_used;
    hom.beta = constant_field(hom_grid, beta_c);
    hom.forcing = forcing_bump(hom_grid, hom_in_u, config.f_center, config.f_width,
                               config.f_mass);
    hom.collar_width = config.collar_width;
    hom.cg_tol = config.cg_tol;
    KernelConvolver hom_conv(hom_grid, kernel);
    const MinimizationResult hom_res = solve_homogenized(hom, &hom_conv);
    study.m_inf = hom_res.total;
    study.m_inf_energy = hom_res.energy_part;
    study.m_inf_mass = hom_res.mass_part;
    study.m_inf_forcing = hom_res.forcing_part;
    study.hom_minimizer = hom_res.minimizer;

    // Sensitivity of the limit value to the capacity uncertainty band.
    if (study.capT_uncertainty > 0.0) {
        HomogenizedProblem hb = hom;
        hb.capT = study.capT_used + study.capT_uncertainty;
        const MinimizationResult rb = solve_homogenized(hb, &hom_conv);
        study.m_inf_band = std::abs(rb.total - hom_res.total);
    }

    for (std::size_t e = 0; e < config.epsilon_list.size(); ++e) {
        const double eps = config.epsilon_list[e];
        EpsilonRecord rec;
        rec.epsilon = eps;
        rec.grid_n = grid_n[e];

        GeneratorSpec gen;
        gen.kind = config.lattice;
        gen.dim = config.dim;
        gen.epsilon = eps;
        gen.box = U.bbox();
        gen.base_jitter = config.base_jitter;
        gen.phi = config.phi;
        const PointSet pts = generate(gen, config.seed);

        const UniformGrid grid = UniformGrid::over(U.bbox(), rec.grid_n);
        rec.h = grid.h;
        const double r_j = config.r_factor * eps;
        PerforatedProblem pp;
        pp.U = U;
        pp.grid = grid;
        pp.kernel = kernel;
        pp.obstacles = build_obstacles(pts, config.T, r_j, grid, eps, exponent);
        rec.obstacle_nodes = pp.obstacles.total_nodes;
        const NodeMask in_u = mask_in_domain(grid, U);
        pp.forcing = forcing_bump(grid, in_u, config.f_center, config.f_width, config.f_mass);
        pp.collar_width = config.collar_width;
        pp.cg_tol = config.cg_tol;
        KernelConvolver conv(grid, kernel);
        const MinimizationResult res = solve_perforated(pp, &conv);

        rec.m_total = res.total;
        rec.m_energy = res.energy_part;
        rec.m_forcing = res.forcing_part;
        rec.iterations = res.stats.iterations;
        rec.residual = res.stats.rel_residual;
        rec.gap_rel = std::abs(res.total - study.m_inf) / std::abs(study.m_inf);
        rec.minimizer_distance =
            lp_distance(res.minimizer, study.hom_minimizer, hom_in_u, config.p);
        if (config.keep_minimizers) study.minimizers.push_back(res.minimizer);
        study.records.push_back(rec);
    }

    study.gaps_nonincreasing = true;
    for (std::size_t e = 1; e < study.records.size(); ++e)
        if (study.records[e].gap_rel > study.records[e - 1].gap_rel * (1.0 + 1e-9))
            study.gaps_nonincreasing = false;
    study.final_gap = study.records.back().gap_rel;
    study.pass = study.gaps_nonincreasing && study.final_gap <= config.threshold;
    return study;
}

SlicingSelection slicing_select(const ScalarField& u, const PointSet& lambda_points,
                                const std::vector<int>& interior_labels, double r_j, int m,
                                int N, const FractionalKernel& kernel, KernelConvolver* conv,
                                double shell_ratio) {
    if (m < 2) throw Error("homogenization", "slicing needs m >= 2");
    if (N < 1) throw Error("homogenization", "slicing needs N >= 1");
    const double q = shell_ratio > 0.0 ? shell_ratio : std::pow(m, -3.0);
    if (!(q > 0.0 && q < 1.0)) throw Error("homogenization", "shell ratio must lie in (0,1)");
    const UniformGrid& g = u.grid;

    std::vector<std::size_t> interior_pos;
    {
        std::vector<int> sorted = interior_labels;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < lambda_points.size(); ++i)
            if (std::binary_search(sorted.begin(), sorted.end(), lambda_points.labels[i]))
                interior_pos.push_back(i);
    }

    SlicingSelection sel;
    const NodeMask rows = mask_all(g);
    std::unique_ptr<KernelConvolver> own;
    if (kernel.p == 2.0 && !conv) {
        own = std::make_unique<KernelConvolver>(g, kernel);
        conv = own.get();
    }

    for (int h = 1; h <= N; ++h) {
        const double outer = std::pow(q, h) * r_j;
        const double inner = std::pow(q, h + 1) * r_j;
        if (outer - inner < 2.0 * g.h)
            throw Error("homogenization", "shells below grid resolution at level " +
                                              std::to_string(h));
        NodeMask shell(g.size(), 0);
        for (std::size_t pi : interior_pos) {
            const Point& x = lambda_points.points[pi];
            for_nodes_near(g, x, outer, [&](std::int64_t node) {
                const double d = dist(g.node(node), x, g.dim);
                if (d > inner && d < outer) shell[node] = 1;
            });
        }
        double defect;
        if (kernel.p == 2.0)
            defect = locality_defect_fft(u, kernel, rows, shell, *conv);
        else
            defect = gagliardo_energy(u, kernel, PairRegion{rows, shell, std::nullopt, false});
        sel.shell_defects.push_back(defect);
    }

    int best = 0;
    for (int h = 1; h < N; ++h)
        if (sel.shell_defects[h] < sel.shell_defects[best]) best = h;
    sel.h_selected = best + 1;
    sel.rho = std::pow(q, sel.h_selected) * r_j;

    // Pigeonhole: N * min <= sum, exact in extended precision.
    long double total = 0.0L;
    for (double d : sel.shell_defects) total += static_cast<long double>(d);
    sel.total_defect = static_cast<double>(total);
    sel.pigeonhole_ok =
        static_cast<long double>(N) *
            static_cast<long double>(sel.shell_defects[best]) <=
        total;
    return sel;
}

JoiningResult apply_joining(const ScalarField& u, const PointSet& lambda_points,
                            const std::vector<int>& interior_labels, double r_j, int m, int N,
                            const std::vector<double>* z_values,
                            const FractionalKernel& kernel, KernelConvolver* conv) {
    const UniformGrid& g = u.grid;
    std::unique_ptr<KernelConvolver> own;
    if (kernel.p == 2.0 && !conv) {
        own = std::make_unique<KernelConvolver>(g, kernel);
        conv = own.get();
    }
    const SlicingSelection sel =
        slicing_select(u, lambda_points, interior_labels, r_j, m, N, kernel, conv);

    JoiningResult out;
    out.h_used = sel.h_selected;
    out.rho = sel.rho;
    const double rho = sel.rho;
    const double r_plateau_in = rho / (m * m);   // C^{i,h}: (rho/m^2, rho/m)
    const double r_plateau_out = rho / m;
    const double r_inner = rho / (m * m * m);    // A_i: (rho/m^3, rho)

    std::vector<std::size_t> interior_pos;
    {
        std::vector<int> sorted = interior_labels;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < lambda_points.size(); ++i)
            if (std::binary_search(sorted.begin(), sorted.end(), lambda_points.labels[i]))
                interior_pos.push_back(i);
    }

    // Plateau constants: annulus means of u unless supplied.
    out.z_values.assign(interior_pos.size(), 0.0);
    if (z_values) {
        if (z_values->size() != interior_pos.size())
            throw Error("homogenization", "z_values size must match the interior index count");
        out.z_values = *z_values;
    } else {
        for (std::size_t t = 0; t < interior_pos.size(); ++t) {
            const Point& x = lambda_points.points[interior_pos[t]];
            double sum = 0.0;
            std::int64_t cnt = 0;
            for_nodes_near(g, x, r_plateau_out, [&](std::int64_t node) {
                const double d = dist(g.node(node), x, g.dim);
                if (d > r_plateau_in && d < r_plateau_out) {
                    sum += u.values[node];
                    ++cnt;
                }
            });
            if (cnt == 0)
                throw Error("homogenization", "annuli unresolved: no nodes in C^(i,h)");
            out.z_values[t] = sum / static_cast<double>(cnt);
        }
    }

    auto cutoff = [&](double t) {
        if (t <= r_inner || t >= rho) return 0.0;
        if (t < r_plateau_in) return (t - r_inner) / (r_plateau_in - r_inner);
        if (t <= r_plateau_out) return 1.0;
        return (rho - t) / (rho - r_plateau_out);
    };

    out.w = u;
    NodeMask plateau(g.size(), 0), support(g.size(), 0);
    std::vector<double> plateau_target(g.size(), 0.0);
    std::vector<double> local_lp(interior_pos.size(), 0.0);
    for (std::size_t t = 0; t < interior_pos.size(); ++t) {
        const Point& x = lambda_points.points[interior_pos[t]];
        const double z = out.z_values[t];
        double lp = 0.0;
        for_nodes_near(g, x, rho, [&](std::int64_t node) {
            const double d = dist(g.node(node), x, g.dim);
            if (d >= rho || d <= r_inner) return;
            const double phi = cutoff(d);
            out.w.values[node] = phi * z + (1.0 - phi) * u.values[node];
            support[node] = 1;
            if (d > r_plateau_in && d <= r_plateau_out) {
                plateau[node] = 1;
                plateau_target[node] = z;
            }
            lp += pow_abs_p(u.values[node] - z, kernel.p);
        });
        local_lp[t] = lp;
    }

    out.plateau_exact = true;
    out.off_support_exact = true;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        if (plateau[i] && out.w.values[i] != plateau_target[i]) out.plateau_exact = false;
        if (!support[i] && out.w.values[i] != u.values[i]) out.off_support_exact = false;
    }

    // Error measurement against the slicing bound.
    double e_w, e_u, defect_a;
    const NodeMask all = mask_all(g);
    if (kernel.p == 2.0) {
        e_w = gagliardo_energy_fft(out.w, kernel, all, *conv);
        e_u = gagliardo_energy_fft(u, kernel, all, *conv);
        defect_a = locality_defect_fft(u, kernel, all, support, *conv);
    } else {
        e_w = gagliardo_energy(out.w, kernel, PairRegion::square(all));
        e_u = gagliardo_energy(u, kernel, PairRegion::square(all));
        defect_a = gagliardo_energy(u, kernel, PairRegion{all, support, std::nullopt, false});
    }
    out.measured_error = std::abs(e_w - e_u);
    const double hn = std::pow(g.h, g.dim);
    double lp_total = 0.0;
    for (double v : local_lp) lp_total += v;
    out.bound_rhs = defect_a + std::pow(m, 2.0 * kernel.p) * std::pow(rho, -kernel.sp()) *
                                   hn * lp_total;
    out.fitted_c = out.bound_rhs > 0.0 ? out.measured_error / out.bound_rhs : 0.0;
    return out;
}

RecoveryResult build_recovery(const ScalarField& u_smooth, const ObstacleFamily& family,
                              const Domain& U, const IndexSets& idx, int shell_levels,
                              double profile_N, const ScalarField& xi_profile, double theta,
                              double capT, double beta_constant,
                              const FractionalKernel& kernel, KernelConvolver* conv) {
    const UniformGrid& g = u_smooth.grid;
    const int m = 2;
    std::unique_ptr<KernelConvolver> own;
    if (kernel.p == 2.0 && !conv) {
        own = std::make_unique<KernelConvolver>(g, kernel);
        conv = own.get();
    }

    RecoveryResult out;
    out.N = shell_levels;
    const double lambda = family.lambda_j;
    const double t_outer = family.T.outer_radius(g.dim);
    if (profile_N < t_outer * (1.0 + 1e-12))
        throw Error("homogenization", "unresolved profiles: truncation ball must contain T");

    // Joining with shell count shell_levels (m = 2 as in the construction).
    const JoiningResult joined =
        apply_joining(u_smooth, family.points, idx.interior, family.r_j, m, shell_levels,
                      nullptr, kernel, conv);
    out.h_used = joined.h_used;
    const double rho = joined.rho;
    const double ball_radius = rho / m;  // replacement balls sit inside the plateau annulus
    if (profile_N * lambda > ball_radius)
        throw Error("homogenization",
                    "unresolved profiles: need N * lambda_j <= " + std::to_string(ball_radius) +
                        ", have " + std::to_string(profile_N * lambda));

    out.u_j = joined.w;

    std::vector<std::size_t> interior_pos, boundary_pos;
    {
        std::vector<int> si = idx.interior, sb = idx.boundary;
        std::sort(si.begin(), si.end());
        std::sort(sb.begin(), sb.end());
        for (std::size_t i = 0; i < family.points.size(); ++i) {
            if (std::binary_search(si.begin(), si.end(), family.points.labels[i]))
                interior_pos.push_back(i);
            else if (std::binary_search(sb.begin(), sb.end(), family.points.labels[i]))
                boundary_pos.push_back(i);
        }
    }

    // Interior balls: capacity-profile correction (1 - xi_N((x - x_i)/lambda)) z_i.
    auto xi_at = [&](const Point& rel) {
        const double v = interpolate(xi_profile, rel);
        return std::clamp(v, 0.0, 1.0);
    };
    std::vector<double> z_of_pos(family.points.size(), 0.0);
    for (std::size_t t = 0; t < interior_pos.size(); ++t)
        z_of_pos[interior_pos[t]] = joined.z_values[t];
    for (std::size_t pi : interior_pos) {
        const Point& x = family.points.points[pi];
        const double z = z_of_pos[pi];
        for_nodes_near(g, x, ball_radius, [&](std::int64_t node) {
            const Point p = g.node(node);
            if (dist(p, x, g.dim) >= ball_radius) return;
            Point rel{};
            for (int d = 0; d < g.dim; ++d) rel[d] = (p[d] - x[d]) / lambda;
            out.u_j.values[node] = (1.0 - xi_at(rel)) * z;
        });
    }

    // Boundary-index balls: cutoff (1 - zeta((x - x_i)/lambda)) w.
    const double t0 = std::max(1.05 * t_outer, profile_N - 1.0);
    if (t0 >= profile_N)
        throw Error("homogenization", "unresolved profiles: no room for the boundary cutoff");
    auto zeta = [&](double t) {
        if (t <= t0) return 1.0;
        if (t >= profile_N) return 0.0;
        return (profile_N - t) / (profile_N - t0);
    };
    for (std::size_t pi : boundary_pos) {
        const Point& x = family.points.points[pi];
        for_nodes_near(g, x, profile_N * lambda, [&](std::int64_t node) {
            const double d = dist(g.node(node), x, g.dim);
            if (d >= profile_N * lambda) return;
            out.u_j.values[node] = (1.0 - zeta(d / lambda)) * joined.w.values[node];
        });
    }

    // Obstacle nodes vanish exactly.
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (family.combined[i]) out.u_j.values[i] = 0.0;
    out.feasible = true;
    for (std::int64_t i = 0; i < g.size(); ++i)
        if (family.combined[i] && out.u_j.values[i] != 0.0) out.feasible = false;

    double umax = 0.0, ujmax = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        umax = std::max(umax, std::abs(u_smooth.values[i]));
        ujmax = std::max(ujmax, std::abs(out.u_j.values[i]));
    }
    out.sup_ratio = umax > 0.0 ? ujmax / umax : 0.0;

    const NodeMask all = mask_all(g);
    const double hn = std::pow(g.h, g.dim);
    double e_uj, e_u;
    if (kernel.p == 2.0) {
        e_uj = gagliardo_energy_fft(out.u_j, kernel, all, *conv);
        e_u = gagliardo_energy_fft(u_smooth, kernel, all, *conv);
    } else {
        e_uj = gagliardo_energy(out.u_j, kernel, PairRegion::square(all));
        e_u = gagliardo_energy(u_smooth, kernel, PairRegion::square(all));
    }
    std::vector<double> mass_terms(g.size(), 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        mass_terms[i] = pow_abs_p(u_smooth.values[i], kernel.p);
    out.F_j = e_uj;
    out.F_limit = e_u + theta * capT * beta_constant * hn * pairwise_sum(mass_terms);
    out.ratio = out.F_limit > 0.0 ? out.F_j / out.F_limit : 0.0;
    (void)U;
    return out;
}

}  // namespace fraclab
