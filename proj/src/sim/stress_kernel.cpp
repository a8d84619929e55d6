#include <algorithm>
#include <cmath>
#include <limits>

#include "fivec/simulator.hpp"

namespace fivec {

namespace {

inline Moduli moduli_of(const StressKernelIO& io, size_t i) {
    if (!io.lambda) return io.constant;
    return Moduli{io.lambda[i], io.mu[i], io.a[i], io.b[i], io.c[i]};
}

inline void linear_stress(const double f[3][2], const Moduli& m, double s[3][2]) {
    const double tr = f[0][0] + f[1][1];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) s[i][j] = m.mu * (f[i][j] + (i < 2 ? f[j][i] : 0.0));
    s[0][0] += m.lambda * tr;
    s[1][1] += m.lambda * tr;
}

inline double cell_max_gradient(const double f[3][2]) {
    double g = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) g = std::max(g, std::abs(f[i][j]));
    return g;
}

inline double run_cell(const StressKernelIO& io, size_t i, Nonlinearity nl) {
    double f[3][2], s[3][2];
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 2; ++n) f[m][n] = io.grad[m][n][i];
    point_stress(f, moduli_of(io, i), nl, s);
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 2; ++n) io.stress[m][n][i] = s[m][n];
    const double g = cell_max_gradient(f);
    return std::isfinite(g) ? g : std::numeric_limits<double>::infinity();
}

}  // namespace

void point_stress(const double f2[3][2], const Moduli& m, Nonlinearity nl, double s2[3][2]) {
    if (nl == Nonlinearity::linear_only) {
        linear_stress(f2, m, s2);
        return;
    }
    // Full 3x3 gradient with d/dx3 = 0.
    double f[3][3];
    for (int i = 0; i < 3; ++i) {
        f[i][0] = f2[i][0];
        f[i][1] = f2[i][1];
        f[i][2] = 0.0;
    }
    double e[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double ftf = 0.0;
            for (int k = 0; k < 3; ++k) ftf += f[k][i] * f[k][j];
            e[i][j] = 0.5 * (f[i][j] + f[j][i] + ftf);
        }
    double e2[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += e[i][k] * e[k][j];
            e2[i][j] = acc;
        }
    const double tr = e[0][0] + e[1][1] + e[2][2];
    const double tr2 = e2[0][0] + e2[1][1] + e2[2][2];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            double fe = 0.0;
            for (int k = 0; k < 3; ++k) fe += f[i][k] * e[k][j];
            const double id = (i == j) ? 1.0 : 0.0;
            s2[i][j] = m.lambda * tr * (id + f[i][j]) + 2.0 * m.mu * (e[i][j] + fe) + m.a * e2[i][j] +
                       m.b * (2.0 * tr * e[i][j] + tr2 * id) + m.c * tr * tr * id;
        }
}

double stress_kernel_serial(const StressKernelIO& io, Nonlinearity nl) {
    double gmax = 0.0;
    for (size_t i = 0; i < io.count; ++i) gmax = std::max(gmax, run_cell(io, i, nl));
    return gmax;
}

double stress_kernel_openmp(const StressKernelIO& io, Nonlinearity nl) {
    double gmax = 0.0;
    const long n = static_cast<long>(io.count);
#pragma omp parallel for schedule(static) reduction(max : gmax)
    for (long i = 0; i < n; ++i) gmax = std::max(gmax, run_cell(io, static_cast<size_t>(i), nl));
    return gmax;
}

}  // namespace fivec
