#include <cmath>
#include <cstdio>
#include <numbers>

#include <omp.h>

#include "fftw_util.hpp"
#include "fivec/errors.hpp"
#include "fivec/simulator.hpp"

namespace fivec {

namespace detail {

ComplexFft2::ComplexFft2(int n1, int n2) {
    ensure_fftw_threads();
    FftwBuffer<std::complex<double>> a(static_cast<size_t>(n1) * n2), b(static_cast<size_t>(n1) * n2);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_plan_with_nthreads(omp_get_max_threads());
    fwd_ = fftw_plan_dft_2d(n1, n2, a.fc(), b.fc(), FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n1, n2, a.fc(), b.fc(), FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft2::~ComplexFft2() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
}

void ComplexFft2::forward(FftwBuffer<std::complex<double>>& in, FftwBuffer<std::complex<double>>& out) const {
    fftw_execute_dft(fwd_, in.fc(), out.fc());
}

void ComplexFft2::backward(FftwBuffer<std::complex<double>>& in, FftwBuffer<std::complex<double>>& out) const {
    fftw_execute_dft(bwd_, in.fc(), out.fc());
}

}  // namespace detail

std::string to_string(PacketMode m) {
    switch (m) {
        case PacketMode::P: return "P";
        case PacketMode::SH: return "SH";
        case PacketMode::SV: return "SV";
    }
    return "?";
}

PacketMode packet_mode_from_string(const std::string& s) {
    if (s == "P") return PacketMode::P;
    if (s == "SH" || s == "S" || s == "S-inplane") return PacketMode::SH;
    if (s == "SV") return PacketMode::SV;
    throw ValidationError("unknown packet mode '" + s + "' (expected P, SH or SV)");
}

Vec3 packet_polarization(PacketMode mode, double q1, double q2) {
    const double r = std::hypot(q1, q2);
    if (mode == PacketMode::SV) return Vec3(0.0, 0.0, 1.0);
    if (r == 0.0) return Vec3::Zero();
    if (mode == PacketMode::P) return Vec3(q1 / r, q2 / r, 0.0);
    return Vec3(-q2 / r, q1 / r, 0.0);
}

void validate_packet(const PacketSource& p, const GridSpec& g) {
    char buf[200];
    const double dn = std::hypot(p.direction[0], p.direction[1]);
    if (!(dn > 0.0) || !std::isfinite(dn)) throw ValidationError("packet direction must be a nonzero 2-vector");
    if (!(p.k0 > 0.0)) throw ValidationError("packet wavenumber k0 must be positive");
    if (p.k0 * g.dx >= std::numbers::pi / 4.0) {
        std::snprintf(buf, sizeof buf, "packet under-resolved: k0 dx = %.4g must be below pi/4", p.k0 * g.dx);
        throw ValidationError(buf);
    }
    if (!(p.sigma_par > 0.0) || !(p.sigma_perp > 0.0)) throw ValidationError("packet envelope widths must be positive");
    const double half = 0.5 * std::min(g.length1(), g.length2());
    if (4.0 * std::max(p.sigma_par, p.sigma_perp) > half) {
        std::snprintf(buf, sizeof buf, "packet envelope (4 sigma = %.4g) does not fit in half the domain (%.4g)",
                      4.0 * std::max(p.sigma_par, p.sigma_perp), half);
        throw ValidationError(buf);
    }
    if (p.k0 * std::min(p.sigma_par, p.sigma_perp) < 2.0)
        throw ValidationError("packet is not narrow-band: k0 * sigma must be at least 2");
    if (!std::isfinite(p.amplitude)) throw ValidationError("packet amplitude must be finite");
}

std::vector<std::complex<double>> packet_scalar(const PacketSource& p, const GridSpec& g) {
    const double dn = std::hypot(p.direction[0], p.direction[1]);
    const double d1 = p.direction[0] / dn, d2 = p.direction[1] / dn;
    const double l1 = g.length1(), l2 = g.length2();
    std::vector<std::complex<double>> out(g.cells());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n1; ++i) {
        double r1 = i * g.dx - p.center[0];
        r1 -= l1 * std::round(r1 / l1);
        for (int j = 0; j < g.n2; ++j) {
            double r2 = j * g.dx - p.center[1];
            r2 -= l2 * std::round(r2 / l2);
            const double s = d1 * r1 + d2 * r2;
            const double q = -d2 * r1 + d1 * r2;
            const double env = std::exp(-0.5 * s * s / (p.sigma_par * p.sigma_par) -
                                        0.5 * q * q / (p.sigma_perp * p.sigma_perp));
            out[static_cast<size_t>(i) * g.n2 + j] = env * std::polar(1.0, p.k0 * s + p.phase);
        }
    }
    return out;
}

void packet_initial_state(const PacketSource& p, const GridSpec& g, const Moduli& m, Field3& u, Field3& v,
                          double scale) {
    validate_packet(p, g);
    const size_t n = g.cells();
    for (int c = 0; c < 3; ++c)
        if (u[c].size() != n || v[c].size() != n) throw ValidationError("field size does not match the grid");
    const double c_mode = std::sqrt(speed_squared(m, p.mode == PacketMode::P ? Mode::P : Mode::S));

    detail::ComplexFft2 fft(g.n1, g.n2);
    detail::ComplexBuffer scalar(n), spec(n), work(n), back(n);
    const auto field = packet_scalar(p, g);
    for (size_t i = 0; i < n; ++i) scalar[i] = field[i];
    fft.forward(scalar, spec);
    const double norm = 1.0 / static_cast<double>(n);
    const double amp = scale * p.amplitude;

    for (int comp = 0; comp < 3; ++comp) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < g.n1; ++i) {
                const double q1 = g.dk1() * detail::signed_index(i, g.n1);
                for (int j = 0; j < g.n2; ++j) {
                    const double q2 = g.dk2() * detail::signed_index(j, g.n2);
                    const size_t idx = static_cast<size_t>(i) * g.n2 + j;
                    const Vec3 e = packet_polarization(p.mode, q1, q2);
                    std::complex<double> val = spec[idx] * (e[comp] * norm);
                    if (pass == 1) val *= std::complex<double>(0.0, -c_mode * std::hypot(q1, q2));
                    work[idx] = val;
                }
            }
            fft.backward(work, back);
            std::vector<double>& dst = pass == 0 ? u[comp] : v[comp];
            for (size_t i = 0; i < n; ++i) dst[i] += amp * back[i].real();
        }
    }
}

}  // namespace fivec
