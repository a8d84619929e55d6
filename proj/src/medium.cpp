#include "fivec/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fivec/errors.hpp"

namespace fivec {

Moduli& Moduli::operator+=(const Moduli& o) {
    lambda += o.lambda;
    mu += o.mu;
    a += o.a;
    b += o.b;
    c += o.c;
    return *this;
}

Moduli operator*(double s, Moduli m) {
    m.lambda *= s;
    m.mu *= s;
    m.a *= s;
    m.b *= s;
    m.c *= s;
    return m;
}

std::optional<std::string> moduli_violation(const Moduli& m) {
    const double vals[] = {m.lambda, m.mu, m.a, m.b, m.c};
    for (double v : vals) {
        if (!std::isfinite(v)) return "non-finite modulus";
    }
    if (!(m.mu > 0.0)) return "mu must be positive (mu = " + std::to_string(m.mu) + ")";
    if (!(m.lambda + m.mu > 0.0)) {
        return "lambda + mu must be positive (lambda + mu = " + std::to_string(m.lambda + m.mu) + ")";
    }
    return std::nullopt;
}

MaterialPoint::MaterialPoint(double lambda, double mu, double a, double b, double c)
    : MaterialPoint(Moduli{lambda, mu, a, b, c}) {}

MaterialPoint::MaterialPoint(const Moduli& m) : m_(m) {
    if (auto why = moduli_violation(m)) throw ValidationError("invalid material point: " + *why);
}

MaterialPoint MaterialPoint::with_landau(double a, double b, double c) const {
    return MaterialPoint(m_.lambda, m_.mu, a, b, c);
}

WaveSpeeds wave_speeds(const Moduli& m) {
    if (auto why = moduli_violation(m)) throw ValidationError("wave speeds undefined: " + *why);
    return {std::sqrt(m.lambda + 2.0 * m.mu), std::sqrt(m.mu)};
}

WaveSpeeds wave_speeds(const MaterialPoint& p) { return wave_speeds(p.moduli()); }

double speed_squared(const Moduli& m, Mode mode) {
    switch (mode) {
        case Mode::P: return m.lambda + 2.0 * m.mu;
        case Mode::S: return m.mu;
        default: throw ValidationError("speed requested for an unclassified mode");
    }
}

bool Box::contains(const Vec3& x) const {
    for (int k = 0; k < 3; ++k) {
        if (x[k] < lo[k] || x[k] > hi[k]) return false;
    }
    return true;
}

MaterialPoint MediumField::material_at(const Vec3& x) const {
    const Moduli m = moduli_at(x);
    if (auto why = moduli_violation(m)) {
        std::ostringstream os;
        os << "medium invalid at (" << x[0] << ", " << x[1] << ", " << x[2] << "): " << *why;
        throw ValidationError(os.str());
    }
    return MaterialPoint(m);
}

std::shared_ptr<ConstantMedium> ConstantMedium::unchecked(const Moduli& m) {
    return std::shared_ptr<ConstantMedium>(new ConstantMedium(Raw{}, m));
}

ModuliSample ConstantMedium::sample(const Vec3&) const { return {m_, {}}; }

Smoothness ConstantMedium::smoothness() const {
    return {Smoothness::Kind::analytic, -1, "constant"};
}

LinearGradientMedium::LinearGradientMedium(const Moduli& base, const std::array<Moduli, 3>& gradient,
                                           const Vec3& origin, std::optional<Box> bounds)
    : base_(base), grad_(gradient), origin_(origin), bounds_(bounds) {}

ModuliSample LinearGradientMedium::sample(const Vec3& x) const {
    Moduli v = base_;
    for (int k = 0; k < 3; ++k) v += (x[k] - origin_[k]) * grad_[k];
    return {v, grad_};
}

bool LinearGradientMedium::is_constant() const {
    for (const auto& g : grad_) {
        if (g.lambda != 0.0 || g.mu != 0.0 || g.a != 0.0 || g.b != 0.0 || g.c != 0.0) return false;
    }
    return true;
}

Smoothness LinearGradientMedium::smoothness() const {
    return {Smoothness::Kind::analytic, -1, "linear gradient"};
}

GridMedium::GridMedium(std::array<int, 3> dims, std::array<double, 3> spacing, Vec3 origin,
                       std::vector<Moduli> nodes)
    : dims_(dims), spacing_(spacing), origin_(origin), nodes_(std::move(nodes)) {
    size_t count = 1;
    for (int k = 0; k < 3; ++k) {
        if (dims_[k] < 1) throw ValidationError("grid medium: dimensions must be >= 1");
        if (dims_[k] > 1 && !(spacing_[k] > 0.0)) throw ValidationError("grid medium: spacing must be positive");
        count *= static_cast<size_t>(dims_[k]);
    }
    if (nodes_.size() != count) throw ValidationError("grid medium: node count does not match dimensions");
}

int GridMedium::ndim() const {
    int n = 0;
    for (int k = 0; k < 3; ++k) n += dims_[k] > 1 ? 1 : 0;
    return n;
}

namespace {

// Catmull-Rom weights and their derivatives for fractional offset t in [0,1).
void cubic_weights(double t, double w[4], double dw[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
    dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
    dw[1] = 0.5 * (9 * t2 - 10 * t);
    dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
    dw[3] = 0.5 * (3 * t2 - 2 * t);
}

}  // namespace

ModuliSample GridMedium::sample(const Vec3& x) const {
    int base[3];
    double w[3][4], dw[3][4];
    int span[3];
    for (int k = 0; k < 3; ++k) {
        if (dims_[k] == 1) {
            base[k] = 0;
            span[k] = 1;
            w[k][0] = 1.0;
            dw[k][0] = 0.0;
            continue;
        }
        const double u = (x[k] - origin_[k]) / spacing_[k];
        const double fl = std::clamp(std::floor(u), 0.0, static_cast<double>(dims_[k] - 2));
        const double t = std::clamp(u - fl, 0.0, 1.0);
        base[k] = static_cast<int>(fl) - 1;
        span[k] = 4;
        cubic_weights(t, w[k], dw[k]);
        for (int q = 0; q < 4; ++q) dw[k][q] /= spacing_[k];
    }
    ModuliSample out{};
    for (int c = 0; c < span[2]; ++c) {
        const int kk = std::clamp(base[2] + c, 0, dims_[2] - 1);
        for (int b = 0; b < span[1]; ++b) {
            const int jj = std::clamp(base[1] + b, 0, dims_[1] - 1);
            for (int a = 0; a < span[0]; ++a) {
                const int ii = std::clamp(base[0] + a, 0, dims_[0] - 1);
                const Moduli& n = node(ii, jj, kk);
                const double wx = w[0][a], wy = w[1][b], wz = w[2][c];
                out.value += (wx * wy * wz) * n;
                out.gradient[0] += (dw[0][a] * wy * wz) * n;
                out.gradient[1] += (wx * dw[1][b] * wz) * n;
                out.gradient[2] += (wx * wy * dw[2][c]) * n;
            }
        }
    }
    return out;
}

Smoothness GridMedium::smoothness() const {
    return {Smoothness::Kind::grid, 3, "grid, Catmull-Rom cubic"};
}

std::optional<Box> GridMedium::bounds() const {
    Box b{origin_, origin_};
    for (int k = 0; k < 3; ++k) {
        if (dims_[k] > 1) {
            b.hi[k] = origin_[k] + spacing_[k] * (dims_[k] - 1);
        } else {
            b.lo[k] = -std::numeric_limits<double>::infinity();
            b.hi[k] = std::numeric_limits<double>::infinity();
        }
    }
    return b;
}

MediumReport validate_medium(const MediumField& m, const std::vector<Vec3>& sample_points) {
    MediumReport report;
    for (size_t i = 0; i < sample_points.size(); ++i) {
        const Moduli v = m.moduli_at(sample_points[i]);
        if (auto why = moduli_violation(v)) {
            report.violations.push_back({"sample " + std::to_string(i), sample_points[i], v, *why});
        }
    }
    if (const auto* g = dynamic_cast<const GridMedium*>(&m)) {
        const auto& d = g->dims();
        const auto& h = g->spacing();
        for (int k = 0; k < d[2]; ++k) {
            for (int j = 0; j < d[1]; ++j) {
                for (int i = 0; i < d[0]; ++i) {
                    const Moduli& v = g->node(i, j, k);
                    if (auto why = moduli_violation(v)) {
                        std::ostringstream os;
                        os << "cell (" << i << ", " << j << ", " << k << ")";
                        const Vec3 pos = g->origin() + Vec3(i * h[0], j * h[1], k * h[2]);
                        report.violations.push_back({os.str(), pos, v, *why});
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace fivec
