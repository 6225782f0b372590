#include "fraclab/convolve.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace fraclab {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::int64_t next_fast_size(std::int64_t n) {
    for (std::int64_t m = n;; ++m) {
        std::int64_t r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

struct KernelConvolver::Impl {
    int dim;
    std::array<std::int64_t, 3> n{};   // grid shape
    std::array<std::int64_t, 3> pn{};  // padded shape
    std::int64_t preal = 0;            // padded real size
    std::int64_t pcomp = 0;            // padded complex size (r2c layout)

    double* scratch = nullptr;
    fftw_complex* spec = nullptr;
    std::vector<double> kft_re, kft_im;  // stencil DFT
    std::vector<double> symbol;          // Re DFT(stencil)
    fftw_plan fwd = nullptr, bwd = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (scratch) fftw_free(scratch);
        if (spec) fftw_free(spec);
    }
};

KernelConvolver::KernelConvolver(const UniformGrid& grid, const FractionalKernel& kernel)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
    if (grid.dim != kernel.dim) throw Error("convolve", "grid/kernel dimension mismatch");
    Impl& im = *impl_;
    im.dim = grid.dim;
    for (int d = 0; d < 3; ++d) im.n[d] = grid.shape[d];
    // Linear convolution with offsets in (-(n-1) .. n-1) needs >= 2n-1.
    for (int d = 0; d < im.dim; ++d) im.pn[d] = next_fast_size(2 * im.n[d] - 1);
    for (int d = im.dim; d < 3; ++d) im.pn[d] = 1;

    const std::int64_t p0 = im.pn[0], p1 = im.pn[1], p2 = im.pn[2];
    im.preal = p0 * p1 * p2;
    im.pcomp = (p0 / 2 + 1) * p1 * p2;

    im.scratch = fftw_alloc_real(im.preal);
    im.spec = fftw_alloc_complex(im.pcomp);

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (im.dim == 2) {
            // FFTW uses row-major (last index fastest); our fastest axis is 0.
            im.fwd = fftw_plan_dft_r2c_2d(static_cast<int>(p1), static_cast<int>(p0), im.scratch,
                                          im.spec, FFTW_ESTIMATE);
            im.bwd = fftw_plan_dft_c2r_2d(static_cast<int>(p1), static_cast<int>(p0), im.spec,
                                          im.scratch, FFTW_ESTIMATE);
        } else {
            im.fwd = fftw_plan_dft_r2c_3d(static_cast<int>(p2), static_cast<int>(p1),
                                          static_cast<int>(p0), im.scratch, im.spec, FFTW_ESTIMATE);
            im.bwd = fftw_plan_dft_c2r_3d(static_cast<int>(p2), static_cast<int>(p1),
                                          static_cast<int>(p0), im.spec, im.scratch, FFTW_ESTIMATE);
        }
    }
    if (!im.fwd || !im.bwd) throw Error("convolve", "FFTW plan creation failed");

    // Stencil in wrapped order: entry for offset d at index (d mod pn).
    std::memset(im.scratch, 0, sizeof(double) * im.preal);
    const double h = grid.h;
    auto wrap = [](std::int64_t d, std::int64_t pn) { return d >= 0 ? d : d + pn; };
    const std::int64_t d2max = im.dim == 3 ? im.n[2] - 1 : 0;
    for (std::int64_t d2 = -d2max; d2 <= d2max; ++d2)
        for (std::int64_t d1 = -(im.n[1] - 1); d1 <= im.n[1] - 1; ++d1)
            for (std::int64_t d0 = -(im.n[0] - 1); d0 <= im.n[0] - 1; ++d0) {
                if (d0 == 0 && d1 == 0 && d2 == 0) continue;
                Point z{static_cast<double>(d0) * h, static_cast<double>(d1) * h,
                        static_cast<double>(d2) * h};
                const std::int64_t at =
                    (wrap(d2, p2) * p1 + wrap(d1, p1)) * p0 + wrap(d0, p0);
                im.scratch[at] = kernel.eval(z);
            }
    fftw_execute(im.fwd);
    im.kft_re.resize(im.pcomp);
    im.kft_im.resize(im.pcomp);
    im.symbol.resize(im.pcomp);
    const double inv = 1.0 / static_cast<double>(im.preal);
    for (std::int64_t i = 0; i < im.pcomp; ++i) {
        im.kft_re[i] = im.spec[i][0] * inv;  // fold the FFTW normalization in here
        im.kft_im[i] = im.spec[i][1] * inv;
        im.symbol[i] = im.spec[i][0] * inv;
    }
}

KernelConvolver::~KernelConvolver() = default;

void KernelConvolver::apply(const double* in, double* out) {
    Impl& im = *impl_;
    const std::int64_t p0 = im.pn[0], p1 = im.pn[1];
    std::memset(im.scratch, 0, sizeof(double) * im.preal);
    for (std::int64_t i2 = 0; i2 < (im.dim == 3 ? im.n[2] : 1); ++i2)
        for (std::int64_t i1 = 0; i1 < im.n[1]; ++i1) {
            const double* src = in + (i2 * im.n[1] + i1) * im.n[0];
            double* dst = im.scratch + (i2 * p1 + i1) * p0;
            std::memcpy(dst, src, sizeof(double) * im.n[0]);
        }
    fftw_execute(im.fwd);
    for (std::int64_t i = 0; i < im.pcomp; ++i) {
        const double re = im.spec[i][0], imag = im.spec[i][1];
        im.spec[i][0] = re * im.kft_re[i] - imag * im.kft_im[i];
        im.spec[i][1] = re * im.kft_im[i] + imag * im.kft_re[i];
    }
    fftw_execute(im.bwd);
    for (std::int64_t i2 = 0; i2 < (im.dim == 3 ? im.n[2] : 1); ++i2)
        for (std::int64_t i1 = 0; i1 < im.n[1]; ++i1) {
            const double* src = im.scratch + (i2 * p1 + i1) * p0;
            double* dst = out + (i2 * im.n[1] + i1) * im.n[0];
            std::memcpy(dst, src, sizeof(double) * im.n[0]);
        }
}

void KernelConvolver::apply_spectral(const double* in, double* out,
                                     const std::vector<double>& mult) {
    Impl& im = *impl_;
    if (static_cast<std::int64_t>(mult.size()) != im.pcomp)
        throw Error("convolve", "spectral multiplier has wrong length");
    const std::int64_t p0 = im.pn[0], p1 = im.pn[1];
    std::memset(im.scratch, 0, sizeof(double) * im.preal);
    for (std::int64_t i2 = 0; i2 < (im.dim == 3 ? im.n[2] : 1); ++i2)
        for (std::int64_t i1 = 0; i1 < im.n[1]; ++i1) {
            const double* src = in + (i2 * im.n[1] + i1) * im.n[0];
            double* dst = im.scratch + (i2 * p1 + i1) * p0;
            std::memcpy(dst, src, sizeof(double) * im.n[0]);
        }
    fftw_execute(im.fwd);
    const double inv = 1.0 / static_cast<double>(im.preal);
    for (std::int64_t i = 0; i < im.pcomp; ++i) {
        const double m = mult[i] * inv;
        im.spec[i][0] *= m;
        im.spec[i][1] *= m;
    }
    fftw_execute(im.bwd);
    for (std::int64_t i2 = 0; i2 < (im.dim == 3 ? im.n[2] : 1); ++i2)
        for (std::int64_t i1 = 0; i1 < im.n[1]; ++i1) {
            const double* src = im.scratch + (i2 * p1 + i1) * p0;
            double* dst = out + (i2 * im.n[1] + i1) * im.n[0];
            std::memcpy(dst, src, sizeof(double) * im.n[0]);
        }
}

const std::vector<double>& KernelConvolver::symbol_real() const { return impl_->symbol; }

std::int64_t KernelConvolver::padded_size() const { return impl_->preal; }

}  // namespace fraclab
