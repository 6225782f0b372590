#pragma once

#include <memory>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/kernel.hpp"

namespace fraclab {

/// Linear (zero-padded) convolution of nodal data with the kernel stencil
/// S[d] = K(d*h), S[0] = 0, on the index lattice of a grid:
///
///   out[x] = sum_{d != 0} K(d*h) in[x - d]
///
/// realized as a circular convolution on a padded grid. Plans use
/// FFTW_ESTIMATE so the chosen algorithm, and therefore the rounding, is
/// deterministic run to run. One instance owns its scratch buffers and is not
/// safe for concurrent apply(); use one instance per solve.
class KernelConvolver {
public:
    KernelConvolver(const UniformGrid& grid, const FractionalKernel& kernel);
    ~KernelConvolver();
    KernelConvolver(const KernelConvolver&) = delete;
    KernelConvolver& operator=(const KernelConvolver&) = delete;

    /// in/out are row-major arrays of grid.size() values; aliasing allowed.
    void apply(const double* in, double* out);

    /// out = restrict(iFFT(mult .* FFT(extend(in)))) with a real spectral
    /// multiplier in the padded r2c layout; the FFT normalization is handled
    /// internally. Backs the circulant preconditioner.
    void apply_spectral(const double* in, double* out, const std::vector<double>& mult);

    /// Symbol of the stencil on the padded torus (real part of its DFT),
    /// indexed like the padded r2c layout. Used by the circulant
    /// preconditioner.
    const std::vector<double>& symbol_real() const;
    std::int64_t padded_size() const;

    const UniformGrid& grid() const { return grid_; }

private:
    struct Impl;
    UniformGrid grid_;
    std::unique_ptr<Impl> impl_;
};

/// Smallest 7-smooth integer >= n (FFT-friendly size).
std::int64_t next_fast_size(std::int64_t n);

}  // namespace fraclab
