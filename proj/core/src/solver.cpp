#include "fraclab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fraclab/parallel.hpp"

namespace fraclab {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t[i] = a[i] * b[i];
    return pairwise_sum(t);
}

namespace {

struct CgWorkspace {
    const QuadraticNonlocalProblem* prob;
    KernelConvolver* conv;
    double scale;                 // 4 h^{2n}
    std::vector<double> s_window; // conv(chi_W)
    std::vector<double> full_in, full_out;

    explicit CgWorkspace(const QuadraticNonlocalProblem& p, KernelConvolver* c)
        : prob(&p), conv(c), scale(4.0 * std::pow(p.grid.h, 2 * p.grid.dim)) {
        const std::int64_t n = p.grid.size();
        std::vector<double> chi(n, 0.0);
        for (std::int64_t i = 0; i < n; ++i)
            if (p.window[i]) chi[i] = 1.0;
        s_window.resize(n);
        conv->apply(chi.data(), s_window.data());
        full_in.assign(n, 0.0);
        full_out.assign(n, 0.0);
    }

    // out = A v on free nodes; v is a full-length vector supported on free.
    void apply(const std::vector<double>& v, std::vector<double>& out) {
        const auto& p = *prob;
        const std::int64_t n = p.grid.size();
        for (std::int64_t i = 0; i < n; ++i) full_in[i] = p.free_mask[i] ? v[i] : 0.0;
        conv->apply(full_in.data(), full_out.data());
        const bool has_mass = !p.mass.empty();
        for (std::int64_t i = 0; i < n; ++i) {
            if (!p.free_mask[i]) {
                out[i] = 0.0;
                continue;
            }
            double val = scale * (s_window[i] * v[i] - full_out[i]);
            if (has_mass) val += 2.0 * p.mass[i] * v[i];
            out[i] = val;
        }
    }

    // b = linear + scale * conv(fixed restricted to W \ free), on free nodes.
    void rhs(std::vector<double>& b) {
        const auto& p = *prob;
        const std::int64_t n = p.grid.size();
        bool any_fixed = false;
        for (std::int64_t i = 0; i < n; ++i) {
            const bool fixed_in_window = p.window[i] && !p.free_mask[i];
            full_in[i] = fixed_in_window && !p.fixed_values.empty() ? p.fixed_values[i] : 0.0;
            any_fixed = any_fixed || full_in[i] != 0.0;
        }
        if (any_fixed)
            conv->apply(full_in.data(), full_out.data());
        else
            std::fill(full_out.begin(), full_out.end(), 0.0);
        for (std::int64_t i = 0; i < n; ++i) {
            double val = p.free_mask[i] ? scale * full_out[i] : 0.0;
            if (p.free_mask[i] && !p.linear.empty()) val += p.linear[i];
            b[i] = val;
        }
    }
};

}  // namespace

SolveStats solve_quadratic(const QuadraticNonlocalProblem& prob, ScalarField& u, double tol,
                           int max_iterations, Preconditioner precond, KernelConvolver* conv) {
    if (prob.kernel.p != 2.0) throw Error("solver", "quadratic solver requires p = 2");
    if (!prob.kernel.aniso.even()) throw Error("solver", "kernel must be even for the CG solver");
    std::unique_ptr<KernelConvolver> own;
    if (!conv) {
        own = std::make_unique<KernelConvolver>(prob.grid, prob.kernel);
        conv = own.get();
    }
    const std::int64_t n = prob.grid.size();
    CgWorkspace ws(prob, conv);

    // Circulant preconditioner symbol: the translation-invariant part of A on
    // the padded torus, floored away from zero at the DC mode.
    std::vector<double> inv_symbol;
    double mass_mean = 0.0;
    if (precond == Preconditioner::Circulant) {
        if (!prob.mass.empty()) {
            double s = 0.0;
            std::int64_t c = 0;
            for (std::int64_t i = 0; i < n; ++i)
                if (prob.free_mask[i]) {
                    s += prob.mass[i];
                    ++c;
                }
            mass_mean = c > 0 ? s / static_cast<double>(c) : 0.0;
        }
        const auto& sym = conv->symbol_real();
        const double s_bar = sym[0];  // K-hat at xi = 0 equals the full stencil sum
        inv_symbol.resize(sym.size());
        double smax = 0.0;
        for (double v : sym) smax = std::max(smax, ws.scale * (s_bar - v) + 2.0 * mass_mean);
        const double floor_val = std::max(1e-10 * smax, 1e-300);
        for (std::size_t i = 0; i < sym.size(); ++i) {
            const double sig = ws.scale * (s_bar - sym[i]) + 2.0 * mass_mean;
            inv_symbol[i] = 1.0 / std::max(sig, floor_val);
        }
    }
    std::vector<double> jacobi_inv(n, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        if (prob.free_mask[i]) {
            const double d = ws.scale * ws.s_window[i] + (prob.mass.empty() ? 0.0 : 2.0 * prob.mass[i]);
            jacobi_inv[i] = d > 0.0 ? 1.0 / d : 0.0;
        }

    auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
        if (precond == Preconditioner::Circulant) {
            conv->apply_spectral(r.data(), z.data(), inv_symbol);
            for (std::int64_t i = 0; i < n; ++i)
                if (!prob.free_mask[i]) z[i] = 0.0;
        } else {
            for (std::int64_t i = 0; i < n; ++i) z[i] = jacobi_inv[i] * r[i];
        }
    };

    // Initial guess: keep the caller's values on free nodes, enforce the rest.
    for (std::int64_t i = 0; i < n; ++i) {
        if (prob.free_mask[i]) continue;
        const bool fixed_in_window = prob.window[i] && !prob.fixed_values.empty();
        u.values[i] = fixed_in_window ? prob.fixed_values[i] : 0.0;
    }

    std::vector<double> b(n), r(n), z(n), pdir(n), q(n), x(n, 0.0);
    ws.rhs(b);
    for (std::int64_t i = 0; i < n; ++i) x[i] = prob.free_mask[i] ? u.values[i] : 0.0;
    ws.apply(x, q);
    for (std::int64_t i = 0; i < n; ++i) r[i] = prob.free_mask[i] ? b[i] - q[i] : 0.0;
    const double bnorm = std::sqrt(dot(b, b));
    SolveStats stats;
    if (bnorm == 0.0) {
        for (std::int64_t i = 0; i < n; ++i)
            if (prob.free_mask[i]) u.values[i] = 0.0;
        stats.converged = true;
        return stats;
    }
    precondition(r, z);
    pdir = z;
    double rz = dot(r, z);
    double relres = std::sqrt(dot(r, r)) / bnorm;
    int it = 0;
    while (relres > tol && it < max_iterations) {
        ws.apply(pdir, q);
        const double pq = dot(pdir, q);
        if (!(pq > 0.0)) break;  // loss of positivity: stop with current iterate
        const double alpha = rz / pq;
        for (std::int64_t i = 0; i < n; ++i) {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * q[i];
        }
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < n; ++i) pdir[i] = z[i] + beta * pdir[i];
        relres = std::sqrt(dot(r, r)) / bnorm;
        ++it;
    }
    for (std::int64_t i = 0; i < n; ++i)
        if (prob.free_mask[i]) u.values[i] = x[i];
    stats.iterations = it;
    stats.rel_residual = relres;
    stats.converged = relres <= tol;
    return stats;
}

namespace {

double problem_energy(const ObstacleEnergyProblem& prob, const ScalarField& u,
                      KernelConvolver* conv) {
    double e;
    if (prob.kernel.p == 2.0 && prob.use_fft_when_p2 && conv)
        e = gagliardo_energy_fft(u, prob.kernel, prob.window, *conv);
    else
        e = gagliardo_energy(u, prob.kernel, PairRegion::square(prob.window));
    const std::int64_t n = prob.grid.size();
    std::vector<double> extra(n, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        if (!prob.window[i]) continue;
        if (!prob.mass.empty())
            extra[i] += prob.mass[i] *
                        std::pow(std::abs(u.values[i]), prob.mass_exponent);
        if (!prob.linear.empty()) extra[i] -= prob.linear[i] * u.values[i];
    }
    return e + pairwise_sum(extra);
}

void project(const ObstacleEnergyProblem& prob, ScalarField& u) {
    const std::int64_t n = prob.grid.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (!prob.window[i] || prob.zero_mask[i])
            u.values[i] = 0.0;
        else if (prob.lower_one_mask[i])
            u.values[i] = std::max(u.values[i], 1.0);
    }
}

}  // namespace

SolveStats projected_gradient(const ObstacleEnergyProblem& prob, ScalarField& u,
                              double tol_decrease, int max_iterations) {
    const std::int64_t n = prob.grid.size();
    std::unique_ptr<KernelConvolver> conv;
    const bool fft = prob.kernel.p == 2.0 && prob.use_fft_when_p2;
    if (fft) conv = std::make_unique<KernelConvolver>(prob.grid, prob.kernel);

    project(prob, u);
    double energy = problem_energy(prob, u, conv.get());

    // Step scale from the operator diagonal.
    std::vector<double> chi(n, 0.0), s(n, 0.0);
    if (fft) {
        for (std::int64_t i = 0; i < n; ++i) chi[i] = prob.window[i] ? 1.0 : 0.0;
        conv->apply(chi.data(), s.data());
    }
    double diag_max = 0.0;
    const double scale = 2.0 * prob.kernel.p * std::pow(prob.grid.h, 2 * prob.grid.dim);
    if (fft) {
        for (std::int64_t i = 0; i < n; ++i)
            if (prob.window[i]) diag_max = std::max(diag_max, scale * s[i]);
    } else {
        // One direct row as a diagonal estimate.
        const auto nodes = mask_indices(prob.window);
        const std::int64_t x = nodes[nodes.size() / 2];
        const Point px = prob.grid.node(x);
        double acc = 0.0;
        for (std::int64_t y : nodes) {
            if (y == x) continue;
            const Point py = prob.grid.node(y);
            Point z{px[0] - py[0], px[1] - py[1], px[2] - py[2]};
            acc += prob.kernel.eval(z);
        }
        diag_max = scale * acc;
    }
    double step = diag_max > 0.0 ? 1.0 / diag_max : 1.0;

    SolveStats stats;
    ScalarField trial = u;
    for (int it = 0; it < max_iterations; ++it) {
        ScalarField grad = apply_operator(u, prob.kernel, prob.window,
                                          fft ? OperatorMethod::Fft : OperatorMethod::Direct,
                                          conv.get());
        for (std::int64_t i = 0; i < n; ++i) {
            grad.values[i] *= 2.0;  // full gradient of the symmetric double sum
            if (!prob.mass.empty() && prob.window[i]) {
                const double q = prob.mass_exponent;
                const double ui = u.values[i];
                const double dmass =
                    q == 2.0 ? 2.0 * ui
                             : q * std::pow(std::abs(ui), q - 2.0) * ui;
                grad.values[i] += prob.mass[i] * dmass;
            }
            if (!prob.linear.empty() && prob.window[i]) grad.values[i] -= prob.linear[i];
        }
        double t = step * 2.0;
        double new_energy = energy;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::int64_t i = 0; i < n; ++i)
                trial.values[i] = u.values[i] - t * grad.values[i];
            project(prob, trial);
            new_energy = problem_energy(prob, trial, conv.get());
            if (new_energy <= energy) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        stats.iterations = it + 1;
        if (!accepted) {
            stats.converged = true;  // no descent direction left at this scale
            break;
        }
        std::swap(u.values, trial.values);
        const double decrease = energy - new_energy;
        energy = new_energy;
        step = t;
        if (decrease < tol_decrease) {
            stats.converged = true;
            break;
        }
    }
    stats.rel_residual = 0.0;
    return stats;
}

}  // namespace fraclab
