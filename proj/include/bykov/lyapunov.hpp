#pragma once

// Lyapunov spectra by integrating the variational equations alongside the
// base orbit and reorthonormalizing the tangent frame at fixed intervals.

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "bykov/integrate.hpp"
#include "bykov/model.hpp"

namespace bykov {

struct LyapunovSettings {
    /// Total integration time, transient included.
    double T = 3750.0;
    double gs_interval = 0.5;
    double zero_tol = 0.01;
    double convergence_tol = 0.005;

    void validate(const IntegratorConfig& cfg) const;
};

/// Modified Gram-Schmidt with one reorthogonalization pass over the columns
/// of `Q`, in place. Returns the norms removed from each column (the diagonal
/// of the triangular factor).
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::ColsAtCompileTime, 1> gram_schmidt(
    Eigen::MatrixBase<Derived>& Q) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Derived::ColsAtCompileTime, 1> norms(Q.cols());
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
            }
        }
        norms(j) = Q.col(j).norm();
        Q.col(j) /= norms(j);
    }
    return norms;
}

/// max |Q^T Q - I| entry.
template <class Derived>
double orthonormality_defect(const Eigen::MatrixBase<Derived>& Q) {
    const auto n = Q.cols();
    return (Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// Ordered tangent vectors (columns) and their accumulated log stretches.
struct TangentFrame {
    Mat4d vectors = Mat4d::Identity();
    Vec4d log_sums = Vec4d::Zero();

    /// Returns the orthonormality defect after the update.
    double reorthonormalize() {
        const Vec4d norms = gram_schmidt(vectors);
        log_sums += norms.array().log().matrix();
        return orthonormality_defect(vectors);
    }
};

enum class AttractorLabel { FixedPoint, LimitCycle, TorusOrChaos };

struct Rgb {
    unsigned char r, g, b;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct AttractorClass {
    AttractorLabel label;
    int nonneg_count;
    Rgb color;
    /// Diagnostic only: lambda1 > 3 zero_tol suggests chaos over a torus.
    bool positive_lambda1 = false;
};

std::string to_string(AttractorLabel label);
/// "red", "blue", "yellow".
std::string color_name(AttractorLabel label);

struct SpectrumResult {
    /// On-sphere spectrum, descending.
    std::array<double, 3> exponents{};
    /// Most negative raw exponent, attributed to the direction normal to S^3.
    double radial_exponent = 0.0;
    double T_total = 0.0;
    double gs_interval = 0.0;
    bool converged = false;
    /// Largest range of any running exponent estimate over the last 10% of the run.
    double tail_variation = 0.0;
    /// Largest orthonormality defect seen after any reorthonormalization.
    double max_frame_defect = 0.0;
    /// All four exponents in descending order.
    std::array<double, 4> raw{};
};

/// Thrown when the discarded exponent is not clearly contracting (>= -0.5).
class RadialAnomaly : public Error {
public:
    RadialAnomaly(const std::string& what, SpectrumResult r) : Error(what), result_(r) {}
    const SpectrumResult& result() const noexcept { return result_; }

private:
    SpectrumResult result_;
};

namespace detail {

using Coupled = Eigen::Matrix<double, 20, 1>;

SpectrumResult finish_spectrum(const Vec4d& log_sums, double averaging_time,
                               const std::vector<Vec4d>& running, double max_frame_defect,
                               const LyapunovSettings& s);

}  // namespace detail

/// Spectrum of an arbitrary 4D field with Jacobian `jac`. The base orbit
/// alone is integrated over [0, t_transient]; the coupled state + tangent
/// system is then integrated to T with reorthonormalization every
/// gs_interval. Exponents are log sums divided by (T - t_transient).
template <class Field, class Jacobian>
SpectrumResult spectrum_of(Field field, Jacobian jac, const Vec4d& x0,
                           const LyapunovSettings& s, const IntegratorConfig& cfg,
                           bool check_radial = true) {
    s.validate(cfg);
    const bool project = cfg.project_to_sphere;

    Vec4d x = x0;
    if (cfg.t_transient > 0.0) {
        auto base = make_stepper<4>(field, x0, 0.0, cfg);
        while (base.t() < cfg.t_transient) {
            step_with<SphereProjection>(base, cfg.t_transient, project);
        }
        x = base.y();
    }

    auto coupled_field = [&field, &jac](const detail::Coupled& y) {
        detail::Coupled dy;
        const Vec4d xs = y.head<4>();
        dy.head<4>() = field(xs);
        const Eigen::Map<const Mat4d> phi(y.data() + 4);
        Eigen::Map<Mat4d>(dy.data() + 4) = jac(xs) * phi;
        return dy;
    };

    TangentFrame frame;
    detail::Coupled y;
    y.head<4>() = x;
    Eigen::Map<Mat4d>(y.data() + 4) = frame.vectors;

    auto stepper = make_stepper<20>(coupled_field, y, cfg.t_transient, cfg);
    const double span = s.T - cfg.t_transient;
    const auto n_intervals = static_cast<long long>(std::ceil(span / s.gs_interval - 1e-9));
    std::vector<Vec4d> running;
    running.reserve(static_cast<std::size_t>(n_intervals));
    double max_defect = 0.0;

    for (long long k = 1; k <= n_intervals; ++k) {
        const double t_next =
            k == n_intervals ? s.T : cfg.t_transient + static_cast<double>(k) * s.gs_interval;
        while (stepper.t() < t_next) {
            step_with<SphereProjection>(stepper, t_next, project);
        }
        detail::Coupled yk = stepper.y();
        Eigen::Map<Mat4d> phi(yk.data() + 4);
        frame.vectors = phi;
        max_defect = std::max(max_defect, frame.reorthonormalize());
        phi = frame.vectors;
        stepper.reset_state(yk);
        running.push_back(frame.log_sums / (t_next - cfg.t_transient));
    }

    SpectrumResult r = detail::finish_spectrum(frame.log_sums, span, running, max_defect, s);
    if (check_radial && !(r.radial_exponent < -0.5)) {
        throw RadialAnomaly("radial exponent " + std::to_string(r.radial_exponent) +
                                " is not below -0.5",
                            r);
    }
    return r;
}

/// Model spectrum; the base orbit is always renormalized onto S^3.
SpectrumResult spectrum(const ModelParams& p, const Vec4d& x0, const LyapunovSettings& s,
                        IntegratorConfig cfg = {});

/// nonneg_count = #{lambda >= -zero_tol}: 0 -> FixedPoint (red),
/// 1 -> LimitCycle (blue), >= 2 -> TorusOrChaos (yellow).
/// Throws Unconverged for an unconverged result unless allow_unconverged.
AttractorClass classify(const SpectrumResult& s, double zero_tol, bool allow_unconverged = false);

/// Classification of exponents alone.
AttractorClass classify_exponents(const std::array<double, 3>& exponents, double zero_tol);

/// Spectrum CSV row `tau1,tau2,lambda1,lambda2,lambda3,radial,nonneg,class`.
std::string spectrum_csv_header();
std::string spectrum_csv_row(double tau1, double tau2, const SpectrumResult& s,
                             const AttractorClass& c);

}  // namespace bykov
