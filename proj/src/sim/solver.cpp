#include <algorithm>
#include <cmath>
#include <cstdio>

#include <omp.h>

#include "fftw_util.hpp"
#include "fivec/errors.hpp"
#include "fivec/simulator.hpp"

namespace fivec {

namespace detail {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void ensure_fftw_threads() {
    static std::once_flag once;
    std::call_once(once, [] {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_init_threads();
    });
}

}  // namespace detail

using detail::ComplexBuffer;
using detail::RealBuffer;
using cd = std::complex<double>;

struct SpectralSolver::Impl {
    size_t nr = 0;  // real cells
    size_t nc = 0;  // spectral cells
    int n2c = 0;
    std::vector<double> k1, k2;
    std::vector<unsigned char> keep;
    std::array<ComplexBuffer, 3> uh, vh, ah;
    ComplexBuffer work;
    std::array<std::array<RealBuffer, 2>, 3> grad, stress;
    std::array<std::vector<double>, 5> moduli;  // per cell when the medium is not constant
    Moduli moduli_const;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }

    double kx(size_t idx, int n) const { return n == 0 ? k1[idx / n2c] : k2[idx % n2c]; }

    void forward(double* in, cd* out) const {
        fftw_execute_dft_r2c(r2c, in, reinterpret_cast<fftw_complex*>(out));
        const double scale = 1.0 / static_cast<double>(nr);
        for (size_t i = 0; i < nc; ++i) out[i] = keep[i] ? out[i] * scale : cd(0.0);
    }

    // c2r overwrites its input, so the caller passes a scratch copy.
    void inverse(cd* scratch, double* out) const {
        fftw_execute_dft_c2r(c2r, reinterpret_cast<fftw_complex*>(scratch), out);
    }

    void derivative_to_real(const ComplexBuffer& fh, int n, double* out) {
        for (size_t i = 0; i < nc; ++i) work[i] = cd(0.0, kx(i, n)) * fh[i];
        inverse(work.data(), out);
    }

    void to_real(const ComplexBuffer& fh, double* out) {
        std::copy(fh.data(), fh.data() + nc, work.data());
        inverse(work.data(), out);
    }
};

SpectralSolver::SpectralSolver(const GridSpec& grid, const MediumField& medium, const SolverOptions& opt)
    : grid_(grid), opt_(opt), impl_(std::make_unique<Impl>()) {
    if (grid.n1 < 8 || grid.n2 < 8 || grid.n1 % 2 || grid.n2 % 2)
        throw ValidationError("grid dimensions must be even and at least 8");
    if (!(grid.dx > 0.0)) throw ValidationError("grid spacing must be positive");
    if (!(opt.cfl > 0.0) || opt.cfl >= verlet_cfl_limit()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "cfl %.4g outside (0, %.4g): velocity Verlet would be unstable", opt.cfl,
                      verlet_cfl_limit());
        throw ValidationError(buf);
    }
    detail::ensure_fftw_threads();
    Impl& s = *impl_;
    s.nr = grid.cells();
    s.n2c = grid.n2 / 2 + 1;
    s.nc = grid.spectral_cells();

    s.k1.resize(grid.n1);
    s.k2.resize(s.n2c);
    for (int i = 0; i < grid.n1; ++i) s.k1[i] = grid.dk1() * detail::signed_index(i, grid.n1);
    for (int j = 0; j < s.n2c; ++j) s.k2[j] = grid.dk2() * j;
    s.keep.resize(s.nc);
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < s.n2c; ++j) {
            const long si = std::labs(detail::signed_index(i, grid.n1));
            s.keep[static_cast<size_t>(i) * s.n2c + j] = (3 * si <= grid.n1 && 3 * j <= grid.n2) ? 1 : 0;
        }

    for (int m = 0; m < 3; ++m) {
        s.uh[m].resize(s.nc);
        s.vh[m].resize(s.nc);
        s.ah[m].resize(s.nc);
        for (int n = 0; n < 2; ++n) {
            s.grad[m][n].resize(s.nr);
            s.stress[m][n].resize(s.nr);
        }
    }
    s.work.resize(s.nc);

    constant_ = medium.is_constant();
    if (constant_) {
        s.moduli_const = medium.moduli_at(Vec3::Zero());
        c_max_ = wave_speeds(s.moduli_const).c_p;
    } else {
        for (auto& ch : s.moduli) ch.resize(s.nr);
        for (int i = 0; i < grid.n1; ++i)
            for (int j = 0; j < grid.n2; ++j) {
                const Vec3 x(i * grid.dx, j * grid.dx, 0.0);
                const MaterialPoint p = medium.material_at(x);
                const size_t idx = static_cast<size_t>(i) * grid.n2 + j;
                s.moduli[0][idx] = p.lambda();
                s.moduli[1][idx] = p.mu();
                s.moduli[2][idx] = p.a_landau();
                s.moduli[3][idx] = p.b_landau();
                s.moduli[4][idx] = p.c_landau();
                c_max_ = std::max(c_max_, wave_speeds(p).c_p);
            }
    }
    dt_ = opt.cfl * grid.dx / c_max_;

    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_plan_with_nthreads(omp_get_max_threads());
        s.r2c = fftw_plan_dft_r2c_2d(grid.n1, grid.n2, s.grad[0][0].data(), s.work.fc(), FFTW_ESTIMATE);
        s.c2r = fftw_plan_dft_c2r_2d(grid.n1, grid.n2, s.work.fc(), s.grad[0][0].data(), FFTW_ESTIMATE);
    }
    if (!s.r2c || !s.c2r) throw NumericError("FFTW planning failed");
}

SpectralSolver::~SpectralSolver() = default;

void SpectralSolver::set_state(const Field3& u, const Field3& v, double t0) {
    Impl& s = *impl_;
    for (int m = 0; m < 3; ++m) {
        if (u[m].size() != s.nr || v[m].size() != s.nr) throw ValidationError("state size does not match the grid");
        RealBuffer& tmp = s.grad[0][0];
        std::copy(u[m].begin(), u[m].end(), tmp.data());
        s.forward(tmp.data(), s.uh[m].data());
        std::copy(v[m].begin(), v[m].end(), tmp.data());
        s.forward(tmp.data(), s.vh[m].data());
    }
    time_ = t0;
    step_ = 0;
    compute_acceleration();
}

void SpectralSolver::compute_acceleration() {
    Impl& s = *impl_;
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 2; ++n) s.derivative_to_real(s.uh[m], n, s.grad[m][n].data());

    StressKernelIO io;
    io.count = s.nr;
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 2; ++n) {
            io.grad[m][n] = s.grad[m][n].data();
            io.stress[m][n] = s.stress[m][n].data();
        }
    if (constant_) {
        io.constant = s.moduli_const;
    } else {
        io.lambda = s.moduli[0].data();
        io.mu = s.moduli[1].data();
        io.a = s.moduli[2].data();
        io.b = s.moduli[3].data();
        io.c = s.moduli[4].data();
    }
    const double gmax = opt_.backend == KernelBackend::openmp ? stress_kernel_openmp(io, opt_.nonlinearity)
                                                              : stress_kernel_serial(io, opt_.nonlinearity);
    const bool runaway = opt_.nonlinearity == Nonlinearity::full && gmax > opt_.max_strain;
    if (!std::isfinite(gmax) || runaway) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "blow-up at step %ld (t = %.6g): max |grad u| = %.6g (limit %.6g); reduce the amplitude",
                      step_, time_, gmax, opt_.max_strain);
        throw BlowUpError(buf, step_, time_);
    }

    for (int m = 0; m < 3; ++m) {
        ComplexBuffer& a = s.ah[m];
        for (size_t i = 0; i < s.nc; ++i) a[i] = 0.0;
        for (int n = 0; n < 2; ++n) {
            s.forward(s.stress[m][n].data(), s.work.data());
            for (size_t i = 0; i < s.nc; ++i) a[i] += cd(0.0, s.kx(i, n)) * s.work[i];
        }
    }
}

void SpectralSolver::step_nonlinear() {
    Impl& s = *impl_;
    const double h = 0.5 * dt_;
    for (int m = 0; m < 3; ++m)
        for (size_t i = 0; i < s.nc; ++i) {
            s.vh[m][i] += h * s.ah[m][i];
            s.uh[m][i] += dt_ * s.vh[m][i];
        }
    ++step_;
    time_ += dt_;
    compute_acceleration();
    for (int m = 0; m < 3; ++m)
        for (size_t i = 0; i < s.nc; ++i) s.vh[m][i] += h * s.ah[m][i];
}

void SpectralSolver::advance_to(double t) {
    while (time_ + 0.5 * dt_ < t) step_nonlinear();
}

Field3 SpectralSolver::displacement() const {
    Field3 f = make_field(grid_);
    for (int m = 0; m < 3; ++m) {
        RealBuffer out(impl_->nr);
        impl_->to_real(impl_->uh[m], out.data());
        std::copy(out.data(), out.data() + impl_->nr, f[m].begin());
    }
    return f;
}

Field3 SpectralSolver::velocity() const {
    Field3 f = make_field(grid_);
    for (int m = 0; m < 3; ++m) {
        RealBuffer out(impl_->nr);
        impl_->to_real(impl_->vh[m], out.data());
        std::copy(out.data(), out.data() + impl_->nr, f[m].begin());
    }
    return f;
}

double SpectralSolver::linear_energy() const {
    Impl& s = *impl_;
    const Field3 v = velocity();
    std::array<std::array<RealBuffer, 2>, 3> g;
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 2; ++n) {
            g[m][n].resize(s.nr);
            s.derivative_to_real(s.uh[m], n, g[m][n].data());
        }
    double e = 0.0;
    for (size_t i = 0; i < s.nr; ++i) {
        const double lam = constant_ ? s.moduli_const.lambda : s.moduli[0][i];
        const double mu = constant_ ? s.moduli_const.mu : s.moduli[1][i];
        const double div = g[0][0][i] + g[1][1][i];
        const double e01 = 0.5 * (g[0][1][i] + g[1][0][i]);
        const double e20 = 0.5 * g[2][0][i];
        const double e21 = 0.5 * g[2][1][i];
        const double ee = g[0][0][i] * g[0][0][i] + g[1][1][i] * g[1][1][i] + 2.0 * (e01 * e01 + e20 * e20 + e21 * e21);
        const double kin = v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i];
        e += 0.5 * kin + 0.5 * (lam * div * div + 2.0 * mu * ee);
    }
    return e * grid_.dx * grid_.dx;
}

Field3 SpectralSolver::acceleration(const Field3& u) {
    Impl& s = *impl_;
    std::array<ComplexBuffer, 3> saved;
    for (int m = 0; m < 3; ++m) {
        saved[m].resize(s.nc);
        std::copy(s.uh[m].data(), s.uh[m].data() + s.nc, saved[m].data());
        RealBuffer tmp(s.nr);
        std::copy(u[m].begin(), u[m].end(), tmp.data());
        s.forward(tmp.data(), s.uh[m].data());
    }
    compute_acceleration();
    Field3 a = make_field(grid_);
    for (int m = 0; m < 3; ++m) {
        RealBuffer out(s.nr);
        s.to_real(s.ah[m], out.data());
        std::copy(out.data(), out.data() + s.nr, a[m].begin());
        std::copy(saved[m].data(), saved[m].data() + s.nc, s.uh[m].data());
    }
    compute_acceleration();
    return a;
}

}  // namespace fivec
