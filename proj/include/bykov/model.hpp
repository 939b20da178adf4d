#pragma once

// Equivariant two-parameter vector field on S^3 and its SO(2)-reduced forms.
//
// Every evaluator is templated on the scalar type so the same expressions
// can be instantiated for double (production) or an extended-precision type.
// Polynomial terms are accumulated left to right in a fixed order, which
// keeps results bit-identical across runs for a given floating-point format.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bykov/errors.hpp"

namespace bykov {

template <class Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <class Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar> using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <class Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <class Scalar> using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec4d = Vec4<double>;
using Mat2d = Mat2<double>;
using Mat4d = Mat4<double>;

/// Model coefficients. Validated on construction and immutable afterwards.
///
/// Constraints: beta < 0 < alpha, beta^2 < 8 alpha^2, |beta| < |alpha|,
/// omega > 0, tau1 and tau2 in [0, 1], kappa >= 0. kappa scales the
/// perturbation (x1 x3 x4, -x1 x2^2, x3^3, -x1 x3 x4) that breaks every
/// symmetry and the invariance of the sphere; it defaults to 0.
class ModelParams {
public:
    ModelParams(double alpha, double beta, double omega, double tau1, double tau2,
                double kappa = 0.0);

    /// alpha = 1, beta = -0.1, omega = 1 with the given tau values.
    static ModelParams reference(double tau1 = 0.0, double tau2 = 0.0, double kappa = 0.0);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double omega() const noexcept { return omega_; }
    double tau1() const noexcept { return tau1_; }
    double tau2() const noexcept { return tau2_; }
    double kappa() const noexcept { return kappa_; }

    ModelParams with_taus(double tau1, double tau2) const {
        return {alpha_, beta_, omega_, tau1, tau2, kappa_};
    }

    /// Returns a description of the first violated constraint, if any.
    static std::optional<std::string> check(double alpha, double beta, double omega,
                                            double tau1, double tau2, double kappa);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    double alpha_, beta_, omega_, tau1_, tau2_, kappa_;
};

inline const Vec4d kO1{0.0, 0.0, 0.0, 1.0};
inline const Vec4d kO2{0.0, 0.0, 0.0, -1.0};

/// r^2 = x1^2 + x2^2 + x3^2 + x4^2, summed in index order.
template <class Scalar>
Scalar radius_squared(const Vec4<Scalar>& x) {
    return x(0) * x(0) + x(1) * x(1) + x(2) * x(2) + x(3) * x(3);
}

/// Full vector field on R^4.
template <class Scalar>
Vec4<Scalar> eval_field_4d(const ModelParams& p, const Vec4<Scalar>& x) {
    const Scalar a(p.alpha()), b(p.beta()), w(p.omega());
    const Scalar t1(p.tau1()), t2(p.tau2()), k(p.kappa());
    const Scalar& x1 = x(0);
    const Scalar& x2 = x(1);
    const Scalar& x3 = x(2);
    const Scalar& x4 = x(3);
    const Scalar s = Scalar(1) - radius_squared(x);

    Vec4<Scalar> f;
    f(0) = x1 * s - w * x2 - a * x1 * x4 + b * x1 * x4 * x4 + t2 * x1 * x3 * x4;
    f(1) = x2 * s + w * x1 - a * x2 * x4 + b * x2 * x4 * x4;
    f(2) = x3 * s + a * x3 * x4 + b * x3 * x4 * x4 + t1 * x4 * x4 * x4 - t2 * x1 * x1 * x4;
    f(3) = x4 * s - a * (x3 * x3 - x1 * x1 - x2 * x2) - b * x4 * (x1 * x1 + x2 * x2 + x3 * x3) -
           t1 * x3 * x4 * x4;
    if (p.kappa() != 0.0) {
        f(0) += k * (x1 * x3 * x4);
        f(1) += k * (-x1 * x2 * x2);
        f(2) += k * (x3 * x3 * x3);
        f(3) += k * (-x1 * x3 * x4);
    }
    return f;
}

/// Analytic Jacobian of eval_field_4d; entry (i, j) = d f_i / d x_j.
template <class Scalar>
Mat4<Scalar> eval_jacobian_4d(const ModelParams& p, const Vec4<Scalar>& x) {
    const Scalar a(p.alpha()), b(p.beta()), w(p.omega());
    const Scalar t1(p.tau1()), t2(p.tau2()), k(p.kappa());
    const Scalar& x1 = x(0);
    const Scalar& x2 = x(1);
    const Scalar& x3 = x(2);
    const Scalar& x4 = x(3);
    const Scalar s = Scalar(1) - radius_squared(x);
    const Scalar two(2);
    const Scalar t2k = t2 + k;

    Mat4<Scalar> J;
    J(0, 0) = s - two * x1 * x1 - a * x4 + b * x4 * x4 + t2k * x3 * x4;
    J(0, 1) = -two * x1 * x2 - w;
    J(0, 2) = -two * x1 * x3 + t2k * x1 * x4;
    J(0, 3) = -two * x1 * x4 - a * x1 + two * b * x1 * x4 + t2k * x1 * x3;

    J(1, 0) = -two * x1 * x2 + w - k * x2 * x2;
    J(1, 1) = s - two * x2 * x2 - a * x4 + b * x4 * x4 - two * k * x1 * x2;
    J(1, 2) = -two * x2 * x3;
    J(1, 3) = -two * x2 * x4 - a * x2 + two * b * x2 * x4;

    J(2, 0) = -two * x1 * x3 - two * t2 * x1 * x4;
    J(2, 1) = -two * x2 * x3;
    J(2, 2) = s - two * x3 * x3 + a * x4 + b * x4 * x4 + Scalar(3) * k * x3 * x3;
    J(2, 3) = -two * x3 * x4 + a * x3 + two * b * x3 * x4 + Scalar(3) * t1 * x4 * x4 - t2 * x1 * x1;

    J(3, 0) = -two * x1 * x4 + two * a * x1 - two * b * x1 * x4 - k * x3 * x4;
    J(3, 1) = -two * x2 * x4 + two * a * x2 - two * b * x2 * x4;
    J(3, 2) = -two * x3 * x4 - two * a * x3 - two * b * x3 * x4 - t1 * x4 * x4 - k * x1 * x4;
    J(3, 3) = s - two * x4 * x4 - b * (x1 * x1 + x2 * x2 + x3 * x3) - two * t1 * x3 * x4 -
              k * x1 * x3;
    return J;
}

/// SO(2) quotient field on (rho, x3, x4). Only defined for tau2 = 0 and kappa = 0.
template <class Scalar>
Vec3<Scalar> eval_field_3d(const ModelParams& p, const Vec3<Scalar>& y) {
    if (p.tau2() != 0.0) {
        throw QuotientInvalid("quotient flow requires tau2 = 0");
    }
    if (p.kappa() != 0.0) {
        throw QuotientInvalid("quotient flow requires kappa = 0");
    }
    const Scalar a(p.alpha()), b(p.beta()), t1(p.tau1());
    const Scalar& rho = y(0);
    const Scalar& x3 = y(1);
    const Scalar& x4 = y(2);
    const Scalar s = Scalar(1) - (rho * rho + x3 * x3 + x4 * x4);

    Vec3<Scalar> f;
    f(0) = rho * s - a * rho * x4 + b * rho * x4 * x4;
    f(1) = x3 * s + a * x3 * x4 + b * x3 * x4 * x4 + t1 * x4 * x4 * x4;
    f(2) = x4 * s - a * (x3 * x3 - rho * rho) - b * x4 * (rho * rho + x3 * x3) - t1 * x3 * x4 * x4;
    return f;
}

/// Planar reduction on (x3, x4) of the quotient flow restricted to S^2.
template <class Scalar>
Vec2<Scalar> eval_field_2d(const ModelParams& p, const Vec2<Scalar>& z) {
    const Scalar a(p.alpha()), b(p.beta()), t1(p.tau1());
    const Scalar& x3 = z(0);
    const Scalar& x4 = z(1);
    Vec2<Scalar> f;
    f(0) = a * x3 * x4 + b * x3 * x4 * x4 + t1 * x4 * x4 * x4;
    f(1) = a * (Scalar(1) - Scalar(2) * x3 * x3 - x4 * x4) + b * x4 * (x4 * x4 - Scalar(1)) -
           t1 * x3 * x4 * x4;
    return f;
}

template <class Scalar>
Mat2<Scalar> eval_jacobian_2d(const ModelParams& p, const Vec2<Scalar>& z) {
    const Scalar a(p.alpha()), b(p.beta()), t1(p.tau1());
    const Scalar& x3 = z(0);
    const Scalar& x4 = z(1);
    Mat2<Scalar> J;
    J(0, 0) = a * x4 + b * x4 * x4;
    J(0, 1) = a * x3 + Scalar(2) * b * x3 * x4 + Scalar(3) * t1 * x4 * x4;
    J(1, 0) = Scalar(-4) * a * x3 - t1 * x4 * x4;
    J(1, 1) = Scalar(-2) * a * x4 + Scalar(3) * b * x4 * x4 - b - Scalar(2) * t1 * x3 * x4;
    return J;
}

/// (x1, x2, x3, x4) -> (sqrt(x1^2 + x2^2), x3, x4).
template <class Scalar>
Vec3<Scalar> to_quotient(const Vec4<Scalar>& x) {
    using std::sqrt;
    return {sqrt(x(0) * x(0) + x(1) * x(1)), x(2), x(3)};
}

// ---------------------------------------------------------------------------
// Symmetry group elements acting on R^4.

class GroupElement {
public:
    enum class Kind { Rotation, Gamma2, GammaPi };

    /// gamma_psi: planar rotation of (x1, x2) by psi radians.
    static GroupElement rotation(double psi) { return {Kind::Rotation, psi}; }
    /// gamma_2: x3 -> -x3.
    static GroupElement gamma2() { return {Kind::Gamma2, 0.0}; }
    /// gamma_pi: (x1, x2) -> (-x1, -x2).
    static GroupElement gamma_pi() { return {Kind::GammaPi, 0.0}; }

    Kind kind() const noexcept { return kind_; }
    double angle() const noexcept { return angle_; }
    std::string name() const;

    template <class Scalar>
    Vec4<Scalar> apply(const Vec4<Scalar>& x) const {
        switch (kind_) {
            case Kind::Rotation: {
                using std::cos;
                using std::sin;
                const Scalar c = cos(Scalar(angle_));
                const Scalar s = sin(Scalar(angle_));
                return {x(0) * c - x(1) * s, x(0) * s + x(1) * c, x(2), x(3)};
            }
            case Kind::Gamma2:
                return {x(0), x(1), -x(2), x(3)};
            case Kind::GammaPi:
                return {-x(0), -x(1), x(2), x(3)};
        }
        return x;
    }

private:
    GroupElement(Kind kind, double angle) : kind_(kind), angle_(angle) {}
    Kind kind_;
    double angle_;
};

inline Vec4d group_apply(const GroupElement& g, const Vec4d& x) { return g.apply(x); }

/// Seeded, uniformly distributed points on the unit sphere S^3.
std::vector<Vec4d> sphere_samples(std::size_t n, std::uint64_t seed);

/// max ||f(g x) - g f(x)||_2 over n seeded points on S^3.
double equivariance_defect(const ModelParams& p, const GroupElement& g, std::size_t n_samples,
                           std::uint64_t seed);

struct TangencyReport {
    double max_defect = 0.0;
    /// Raised when kappa != 0: the perturbation is not tangent to the sphere.
    bool tangency_not_guaranteed = false;
};

/// max |<f(x), x>| over n seeded points on S^3.
TangencyReport sphere_tangency_defect(const ModelParams& p, std::size_t n_samples,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Linearization constants of the heteroclinic network and regime curves.

struct DerivedConstants {
    double C1, C2;   // contracting rates, alpha - beta
    double E1, E2;   // expanding rates, alpha + beta
    double delta1, delta2, delta;
    double K;        // 2 alpha / (alpha + beta)^2
    double Komega;   // twisting number, 2 alpha omega / (alpha + beta)^2
};

DerivedConstants derived_constants(const ModelParams& p);

/// 1 / sqrt(1 + K^2). Throws DomainError for K <= 0.
double h1_curve(double Komega);
/// (exp(6 pi / K) - 1) / (exp(6 pi / K) - 1/6). Throws DomainError for K <= 0.
double h2_curve(double Komega);

enum class Regime { Torus, Transition, Horseshoe };
std::string to_string(Regime r);

/// Torus below h1, Horseshoe above h2, Transition in between.
Regime predicted_regime(double Komega, double ratio);
/// Same with ratio = tau2 / tau1. Throws DomainError when tau1 = 0.
Regime predicted_regime(const ModelParams& p);

}  // namespace bykov
