#include "bykov/validate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>

namespace bykov {

namespace {

// Sorted by (real, imag) so two spectra can be compared entrywise.
std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

double eigen_mismatch(const ModelParams& p, const Vec4d& eq,
                      std::vector<std::complex<double>> expected) {
    // The tangent space at (0,0,0,+-1) is spanned by the first three axes.
    const Eigen::Matrix3d block = eval_jacobian_4d(p, eq).topLeftCorner<3, 3>();
    const Eigen::EigenSolver<Eigen::Matrix3d> es(block);
    std::vector<std::complex<double>> got(es.eigenvalues().data(), es.eigenvalues().data() + 3);
    got = sorted(got);
    expected = sorted(expected);
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(got[k] - expected[k]));
    return worst;
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(double alpha, double beta, double omega,
                                             std::uint64_t seed, std::size_t samples) {
    std::vector<CheckResult> out;
    const double taus[] = {0.0, 0.5, 1.0};

    double tangency = 0.0, gpi = 0.0, so2 = 0.0, subspace = 0.0, equilibria = 0.0;
    std::uint64_t s = seed;
    for (double t1 : taus) {
        for (double t2 : taus) {
            const ModelParams p(alpha, beta, omega, t1, t2);
            tangency = std::max(tangency, sphere_tangency_defect(p, samples, s++).max_defect);
            gpi = std::max(gpi, equivariance_defect(p, GroupElement::gamma_pi(), samples / 10, s++));
        }
        const ModelParams p0(alpha, beta, omega, t1, 0.0);
        std::mt19937_64 rng(s++);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.141592653589793);
        for (int k = 0; k < 20; ++k) {
            so2 = std::max(so2, equivariance_defect(p0, GroupElement::rotation(angle(rng)),
                                                    samples / 100, s++));
        }
    }
    for (double t2 : taus) {
        for (double kappa : {0.0, 0.3}) {
            const ModelParams p(alpha, beta, omega, 0.0, t2, kappa);
            equilibria = std::max({equilibria, eval_field_4d(p, kO1).cwiseAbs().maxCoeff(),
                                   eval_field_4d(p, kO2).cwiseAbs().maxCoeff()});
            std::mt19937_64 rng(s++);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (int k = 0; k < 100; ++k) {
                const ModelParams q(alpha, beta, omega, 0.5 * (u(rng) + 1.0), t2, kappa);
                const Vec4d f = eval_field_4d(q, Vec4d(0.0, 0.0, u(rng), u(rng)));
                subspace = std::max({subspace, std::abs(f(0)), std::abs(f(1))});
            }
        }
    }
    out.push_back({"tangency <f(x),x> on S^3 (kappa=0)", tangency, 1e-12});
    out.push_back({"gammaPi equivariance (all tau)", gpi, 1e-13});
    out.push_back({"SO(2) equivariance (tau2=0)", so2, 1e-13});
    out.push_back({"f(O1)=f(O2)=0 (tau1=0)", equilibria, 1e-300});
    out.push_back({"x1=x2=0 subspace invariance", subspace, 1e-300});
    out.push_back({"gamma2 equivariance (tau=0)",
                   equivariance_defect(ModelParams(alpha, beta, omega, 0.0, 0.0),
                                       GroupElement::gamma2(), samples / 10, s++),
                   1e-13});
    out.push_back({"gamma2 defect at (tau1,tau2)=(0,0.3)",
                   equivariance_defect(ModelParams(alpha, beta, omega, 0.0, 0.3),
                                       GroupElement::gamma2(), samples / 10, s++),
                   0.0, true});

    // Central differences against the analytic Jacobian.
    double fd = 0.0;
    {
        const double h = 1e-6;
        std::mt19937_64 rng(s++);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto pts = sphere_samples(100, s++);
        for (const Vec4d& x : pts) {
            const ModelParams p(alpha, beta, omega, u(rng), u(rng), 0.5 * u(rng));
            const Mat4d J = eval_jacobian_4d(p, x);
            for (int j = 0; j < 4; ++j) {
                Vec4d e = Vec4d::Zero();
                e(j) = h;
                const Vec4d col = (eval_field_4d(p, Vec4d(x + e)) - eval_field_4d(p, Vec4d(x - e))) /
                                  (2.0 * h);
                fd = std::max(fd, (col - J.col(j)).cwiseAbs().maxCoeff());
            }
        }
    }
    out.push_back({"Jacobian vs central differences", fd, 1e-6});

    {
        const ModelParams p(alpha, beta, omega, 0.0, 0.0);
        using C = std::complex<double>;
        const double a = alpha, b = beta, w = omega;
        const double e1 = eigen_mismatch(p, kO1, {C(-(a - b), w), C(-(a - b), -w), C(a + b, 0)});
        const double e2 = eigen_mismatch(p, kO2, {C(a + b, w), C(a + b, -w), C(-(a - b), 0)});
        out.push_back({"eigenvalues at O1 vs closed form", e1, 1e-10});
        out.push_back({"eigenvalues at O2 vs closed form", e2, 1e-10});
        const DerivedConstants c = derived_constants(p);
        const double bad = (c.delta1 > 1.0 && c.delta1 == c.delta2 && c.Komega > 0.0) ? 0.0 : 1.0;
        out.push_back({"delta1 = delta2 > 1, Komega > 0", bad, 0.5});
    }
    {
        double bad = 0.0;
        for (int k = 0; k <= 600; ++k) {
            const double K = std::pow(10.0, -3.0 + 6.0 * k / 600.0);
            if (!(h1_curve(K) < h2_curve(K))) bad += 1.0;
        }
        out.push_back({"h1 < h2 on [1e-3, 1e3] (violations)", bad, 0.5});
    }
    return out;
}

void print_check_table(std::ostream& os, const std::vector<CheckResult>& checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-40s %-12s %-10s %s\n", "check", "value", "threshold",
                  "status");
    os << buf;
    for (const auto& c : checks) {
        const char* status = c.informational ? "INFO" : (c.passed() ? "PASS" : "FAIL");
        if (c.informational) {
            std::snprintf(buf, sizeof buf, "%-40s %-12.4e %-10s %s\n", c.name.c_str(), c.value,
                          "-", status);
        } else {
            std::snprintf(buf, sizeof buf, "%-40s %-12.4e %-10.1e %s\n", c.name.c_str(), c.value,
                          c.threshold, status);
        }
        os << buf;
    }
}

}  // namespace bykov
