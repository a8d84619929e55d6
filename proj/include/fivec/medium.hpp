#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fivec/types.hpp"

namespace fivec {

/// Raw five-constant record. No invariants are enforced here.
struct Moduli {
    double lambda = 0.0;
    double mu = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    Moduli& operator+=(const Moduli& o);
    friend Moduli operator*(double s, Moduli m);
    friend Moduli operator+(Moduli l, const Moduli& r) { return l += r; }
};

/// Returns a description of the violated invariant, if any.
std::optional<std::string> moduli_violation(const Moduli& m);

/// Elastic parameters at a point; construction enforces mu > 0 and lambda + mu > 0.
class MaterialPoint {
public:
    MaterialPoint(double lambda, double mu, double a = 0.0, double b = 0.0, double c = 0.0);
    explicit MaterialPoint(const Moduli& m);

    double lambda() const { return m_.lambda; }
    double mu() const { return m_.mu; }
    double a_landau() const { return m_.a; }
    double b_landau() const { return m_.b; }
    double c_landau() const { return m_.c; }
    const Moduli& moduli() const { return m_; }

    MaterialPoint with_landau(double a, double b, double c) const;

private:
    Moduli m_;
};

struct WaveSpeeds {
    double c_p;
    double c_s;
};

WaveSpeeds wave_speeds(const MaterialPoint& p);
WaveSpeeds wave_speeds(const Moduli& m);

/// Squared speed of the given mode.
double speed_squared(const Moduli& m, Mode mode);

struct Box {
    Vec3 lo;
    Vec3 hi;
    bool contains(const Vec3& x) const;
};

struct ModuliSample {
    Moduli value;
    std::array<Moduli, 3> gradient;
};

struct Smoothness {
    enum class Kind { analytic, grid } kind = Kind::analytic;
    int interpolation_order = 0;
    std::string description;
};

/// Parameter field over the domain. Implementations are immutable and thread-safe.
class MediumField {
public:
    virtual ~MediumField() = default;

    virtual ModuliSample sample(const Vec3& x) const = 0;
    virtual bool is_constant() const = 0;
    virtual Smoothness smoothness() const = 0;
    virtual std::optional<Box> bounds() const { return std::nullopt; }

    Moduli moduli_at(const Vec3& x) const { return sample(x).value; }
    MaterialPoint material_at(const Vec3& x) const;
};

using MediumPtr = std::shared_ptr<const MediumField>;

class ConstantMedium final : public MediumField {
public:
    explicit ConstantMedium(const MaterialPoint& p) : m_(p.moduli()) {}
    /// Unchecked variant, used to carry invalid media into validation reports.
    static std::shared_ptr<ConstantMedium> unchecked(const Moduli& m);

    ModuliSample sample(const Vec3&) const override;
    bool is_constant() const override { return true; }
    Smoothness smoothness() const override;

private:
    struct Raw {};
    ConstantMedium(Raw, const Moduli& m) : m_(m) {}
    Moduli m_;
};

/// value(x) = base + sum_k gradient[k] * (x_k - origin_k)
class LinearGradientMedium final : public MediumField {
public:
    LinearGradientMedium(const Moduli& base, const std::array<Moduli, 3>& gradient,
                         const Vec3& origin = Vec3::Zero(), std::optional<Box> bounds = std::nullopt);

    ModuliSample sample(const Vec3& x) const override;
    bool is_constant() const override;
    Smoothness smoothness() const override;
    std::optional<Box> bounds() const override { return bounds_; }

private:
    Moduli base_;
    std::array<Moduli, 3> grad_;
    Vec3 origin_;
    std::optional<Box> bounds_;
};

/// Regular grid of nodes with Catmull-Rom (C1) cubic interpolation.
/// Node (i,j,k) sits at origin + (i*h0, j*h1, k*h2). Unused trailing dims have size 1.
class GridMedium final : public MediumField {
public:
    GridMedium(std::array<int, 3> dims, std::array<double, 3> spacing, Vec3 origin,
               std::vector<Moduli> nodes);

    ModuliSample sample(const Vec3& x) const override;
    bool is_constant() const override { return false; }
    Smoothness smoothness() const override;
    std::optional<Box> bounds() const override;

    const std::array<int, 3>& dims() const { return dims_; }
    const std::array<double, 3>& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    const std::vector<Moduli>& nodes() const { return nodes_; }
    int ndim() const;

    const Moduli& node(int i, int j, int k) const {
        return nodes_[(static_cast<size_t>(k) * dims_[1] + j) * dims_[0] + i];
    }

private:
    std::array<int, 3> dims_;
    std::array<double, 3> spacing_;
    Vec3 origin_;
    std::vector<Moduli> nodes_;
};

struct Violation {
    std::string where;
    Vec3 position = Vec3::Zero();
    Moduli values;
    std::string reason;
};

struct MediumReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every sample point and, for grid media, every stored node.
MediumReport validate_medium(const MediumField& m, const std::vector<Vec3>& sample_points);

}  // namespace fivec
