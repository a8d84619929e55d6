#include <algorithm>
#include <cmath>
#include <numbers>

#include "fftw_util.hpp"
#include "fivec/errors.hpp"
#include "fivec/simulator.hpp"

namespace fivec {

namespace {

template <class T>
std::complex<double> project_impl(const std::array<std::vector<T>, 3>& f, const GridSpec& g,
                                  const std::array<double, 2>& k, const Vec3& pol, const std::vector<double>& window) {
    const size_t n = g.cells();
    for (const auto& c : f)
        if (c.size() != n) throw ValidationError("field size does not match the grid");
    if (!window.empty()) {
        if (window.size() != n) throw ValidationError("window size does not match the grid");
        if (std::none_of(window.begin(), window.end(), [](double w) { return w != 0.0; }))
            throw ValidationError("measurement window is empty");
    }
    std::vector<std::complex<double>> row(g.n1), col(g.n2);
    for (int i = 0; i < g.n1; ++i) row[i] = std::polar(1.0, -k[0] * i * g.dx);
    for (int j = 0; j < g.n2; ++j) col[j] = std::polar(1.0, -k[1] * j * g.dx);

    std::complex<double> total = 0.0;
    for (int i = 0; i < g.n1; ++i) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < g.n2; ++j) {
            const size_t idx = static_cast<size_t>(i) * g.n2 + j;
            std::complex<double> v = pol[0] * f[0][idx] + pol[1] * f[1][idx] + pol[2] * f[2][idx];
            if (!window.empty()) v *= window[idx];
            acc += v * col[j];
        }
        total += acc * row[i];
    }
    return total / static_cast<double>(n);
}

}  // namespace

std::complex<double> project_at(const Field3& f, const GridSpec& g, const std::array<double, 2>& k, const Vec3& pol,
                                const std::vector<double>& window) {
    return project_impl(f, g, k, pol, window);
}

std::complex<double> project_at(const ComplexField3& f, const GridSpec& g, const std::array<double, 2>& k,
                                const Vec3& pol, const std::vector<double>& window) {
    return project_impl(f, g, k, pol, window);
}

std::complex<double> measure_mode_amplitude(const Field3& f, const GridSpec& g, const std::array<double, 2>& k,
                                            PacketMode mode, const std::vector<double>& window) {
    if (k[0] == 0.0 && k[1] == 0.0 && mode != PacketMode::SV)
        throw ValidationError("mode projection needs a nonzero wavevector");
    return project_at(f, g, k, packet_polarization(mode, k[0], k[1]), window);
}

std::complex<double> measure_mode_amplitude(const ComplexField3& f, const GridSpec& g, const std::array<double, 2>& k,
                                            PacketMode mode, const std::vector<double>& window) {
    if (k[0] == 0.0 && k[1] == 0.0 && mode != PacketMode::SV)
        throw ValidationError("mode projection needs a nonzero wavevector");
    return project_at(f, g, k, packet_polarization(mode, k[0], k[1]), window);
}

std::vector<double> disk_window(const GridSpec& g, const std::array<double, 2>& center, double radius, double taper) {
    if (!(radius > 0.0) || taper < 0.0) throw ValidationError("window radius must be positive and taper non-negative");
    std::vector<double> w(g.cells());
    const double l1 = g.length1(), l2 = g.length2();
    for (int i = 0; i < g.n1; ++i) {
        double r1 = i * g.dx - center[0];
        r1 -= l1 * std::round(r1 / l1);
        for (int j = 0; j < g.n2; ++j) {
            double r2 = j * g.dx - center[1];
            r2 -= l2 * std::round(r2 / l2);
            const double r = std::hypot(r1, r2);
            double v = 0.0;
            if (r <= radius)
                v = 1.0;
            else if (taper > 0.0 && r < radius + taper)
                v = 0.5 * (1.0 + std::cos(std::numbers::pi * (r - radius) / taper));
            w[static_cast<size_t>(i) * g.n2 + j] = v;
        }
    }
    return w;
}

std::array<double, 2> spectral_peak(const Field3& f, const GridSpec& g) {
    const size_t n = g.cells();
    detail::ComplexFft2 fft(g.n1, g.n2);
    detail::ComplexBuffer in(n), out(n);
    std::vector<double> power(n, 0.0);
    for (int c = 0; c < 3; ++c) {
        if (f[c].size() != n) throw ValidationError("field size does not match the grid");
        for (size_t i = 0; i < n; ++i) in[i] = f[c][i];
        fft.forward(in, out);
        for (size_t i = 0; i < n; ++i) power[i] += std::norm(out[i]);
    }
    power[0] = 0.0;
    size_t best = 0;
    for (size_t i = 1; i < n; ++i)
        if (power[i] > power[best]) best = i;
    double k1 = g.dk1() * detail::signed_index(static_cast<long>(best / g.n2), g.n1);
    double k2 = g.dk2() * detail::signed_index(static_cast<long>(best % g.n2), g.n2);
    if (k1 < 0.0 || (k1 == 0.0 && k2 < 0.0)) {
        k1 = -k1;
        k2 = -k2;
    }
    return {k1, k2};
}

WavefieldRecord extract_bilinear_response(const WavefieldRecord& run12, const WavefieldRecord& run1,
                                          const WavefieldRecord& run2) {
    auto same_grid = [](const GridSpec& a, const GridSpec& b) {
        return a.n1 == b.n1 && a.n2 == b.n2 && a.dx == b.dx;
    };
    if (!same_grid(run12.grid, run1.grid) || !same_grid(run12.grid, run2.grid))
        throw ValidationError("bilinear extraction: runs use different grids");
    if (run12.times.size() != run1.times.size() || run12.times.size() != run2.times.size())
        throw ValidationError("bilinear extraction: runs have different snapshot counts");
    for (size_t k = 0; k < run12.times.size(); ++k)
        if (std::abs(run12.times[k] - run1.times[k]) > 1e-9 || std::abs(run12.times[k] - run2.times[k]) > 1e-9)
            throw ValidationError("bilinear extraction: snapshot times differ between runs");
    if (run12.eps1 == 0.0 || run12.eps2 == 0.0)
        throw ValidationError("bilinear extraction: the combined run needs both amplitudes nonzero");
    if (run1.eps1 != run12.eps1 || run1.eps2 != 0.0 || run2.eps2 != run12.eps2 || run2.eps1 != 0.0)
        throw ValidationError("bilinear extraction: single-source runs do not match the combined run's amplitudes");
    if (run12.meta.contains("medium") && run1.meta.contains("medium") && run2.meta.contains("medium") &&
        (run12.meta["medium"] != run1.meta["medium"] || run12.meta["medium"] != run2.meta["medium"]))
        throw ValidationError("bilinear extraction: runs use different media");

    WavefieldRecord out;
    out.grid = run12.grid;
    out.times = run12.times;
    out.eps1 = run12.eps1;
    out.eps2 = run12.eps2;
    out.meta = run12.meta;
    out.meta["kind"] = "u12";
    const double inv = 1.0 / (run12.eps1 * run12.eps2);
    out.snapshots.resize(run12.snapshots.size());
    for (size_t k = 0; k < run12.snapshots.size(); ++k) {
        Field3& f = out.snapshots[k];
        for (int c = 0; c < 3; ++c) {
            const auto& a = run12.snapshots[k][c];
            const auto& b = run1.snapshots[k][c];
            const auto& d = run2.snapshots[k][c];
            f[c].resize(a.size());
            for (size_t i = 0; i < a.size(); ++i) f[c][i] = (a[i] - b[i] - d[i]) * inv;
        }
    }
    return out;
}

}  // namespace fivec
