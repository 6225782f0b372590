#pragma once

#include <vector>

#include "fraclab/convolve.hpp"
#include "fraclab/energy.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// Equality-constrained quadratic form (p = 2):
///   F(u) = h^{2n} sum_{x,y in W} K(x-y)(u(x)-u(y))^2
///          + sum_x mass(x) u(x)^2 - sum_x linear(x) u(x)
/// minimized over the free nodes, with u prescribed by fixed_values on
/// W \ free and zero outside W. Stationarity gives an SPD system solved by
/// preconditioned CG with an FFT matvec.
struct QuadraticNonlocalProblem {
    UniformGrid grid;
    FractionalKernel kernel;
    NodeMask window;
    NodeMask free_mask;
    std::vector<double> fixed_values;  // full length; read off free inside W
    std::vector<double> mass;          // optional diagonal term (full length)
    std::vector<double> linear;        // optional linear term (full length)
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

enum class Preconditioner { Jacobi, Circulant };

SolveStats solve_quadratic(const QuadraticNonlocalProblem& prob, ScalarField& u, double tol,
                           int max_iterations, Preconditioner precond, KernelConvolver* conv);

/// General-p convex energy with bilateral/unilateral node constraints:
///   minimize E_W(u) + sum mass u^2 ... (mass/linear as above, p-independent)
/// subject to u = 0 on zero_mask and u >= 1 on lower_one_mask. Projected
/// gradient with Armijo backtracking; stops when the energy decrease per
/// accepted step falls below tol_decrease. Direct O(N^2) gradient: intended
/// for grids <= 128^2; p = 2 instances may route through the FFT path.
struct ObstacleEnergyProblem {
    UniformGrid grid;
    FractionalKernel kernel;
    NodeMask window;
    NodeMask zero_mask;
    NodeMask lower_one_mask;
    std::vector<double> mass;     // coefficient of |u|^mass_exponent
    double mass_exponent = 2.0;
    std::vector<double> linear;
    bool use_fft_when_p2 = true;
};

SolveStats projected_gradient(const ObstacleEnergyProblem& prob, ScalarField& u,
                              double tol_decrease, int max_iterations);

/// Deterministic dot product (pairwise tree on the elementwise products).
double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace fraclab
