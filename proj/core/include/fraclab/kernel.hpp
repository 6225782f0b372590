#pragma once

#include <string>

#include "fraclab/common.hpp"

namespace fraclab {

/// Direction-dependent weight a(z/|z|) with 1 <= a <= 1 + strength, so the
/// ellipticity constant alpha = 1 + strength sandwiches the kernel.
struct Anisotropy {
    enum class Id { Isotropic, Cos2 } id = Id::Isotropic;
    double strength = 0.0;       // Cos2: a(t) = 1 + strength * cos^2(angle to axis)
    Point axis{1.0, 0.0, 0.0};   // unit vector

    double eval(const Point& unit_dir, int dim) const {
        if (id == Id::Isotropic) return 1.0;
        double c = 0.0;
        for (int d = 0; d < dim; ++d) c += unit_dir[d] * axis[d];
        return 1.0 + strength * c * c;
    }
    bool even() const { return true; }  // both variants satisfy a(-t) = a(t)
    std::string name() const { return id == Id::Isotropic ? "isotropic" : "cos2"; }
};

/// Homogeneous kernel K(z) = a(z/|z|) |z|^{-(n+sp)} with ellipticity sandwich
/// alpha^{-1} |z|^{-(n+sp)} <= K(z) <= alpha |z|^{-(n+sp)}.
struct FractionalKernel {
    int dim = 2;
    double s = 0.55;
    double p = 2.0;
    Anisotropy aniso;

    FractionalKernel() = default;
    FractionalKernel(int n, double s_, double p_, Anisotropy a = {}) : dim(n), s(s_), p(p_), aniso(a) {
        validate();
    }

    void validate() const {
        if (dim < 2 || dim > 3) throw Error("kernel", "dimension must be 2 or 3");
        if (!(s > 0.0 && s < 1.0)) throw Error("kernel", "s must lie in (0,1)");
        if (!(p > 1.0)) throw Error("kernel", "p must exceed 1");
        if (!(s * p > 1.0 && s * p < dim))
            throw Error("kernel", "sp must lie in (1, n)");
        if (aniso.strength < 0.0) throw Error("kernel", "anisotropy strength must be >= 0");
    }

    double sp() const { return s * p; }
    double exponent() const { return static_cast<double>(dim) + s * p; }
    double alpha() const { return 1.0 + aniso.strength; }

    double eval(const Point& z) const {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += z[d] * z[d];
        if (r2 == 0.0) throw Error("kernel", "kernel singularity: z = 0");
        const double r = std::sqrt(r2);
        double a = 1.0;
        if (aniso.id != Anisotropy::Id::Isotropic) {
            Point u{};
            for (int d = 0; d < dim; ++d) u[d] = z[d] / r;
            a = aniso.eval(u, dim);
        }
        return a * std::pow(r, -exponent());
    }
};

inline double kernel_eval(const FractionalKernel& k, const Point& z) { return k.eval(z); }

}  // namespace fraclab
