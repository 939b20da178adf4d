#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "bykov/model.hpp"

using namespace bykov;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("params") {
    TEST_CASE("reference parameters are admissible") {
        const ModelParams p = ModelParams::reference(0.5, 0.2);
        CHECK(p.alpha() == 1.0);
        CHECK(p.beta() == -0.1);
        CHECK(p.omega() == 1.0);
        CHECK(p.tau1() == 0.5);
        CHECK(p.tau2() == 0.2);
        CHECK(p.kappa() == 0.0);
        CHECK(p.with_taus(0.1, 0.3) == ModelParams(1.0, -0.1, 1.0, 0.1, 0.3));
    }

    TEST_CASE("constraint violations are rejected at construction") {
        CHECK_THROWS_AS(ModelParams(0.0, -0.1, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(-1.0, -0.1, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, 0.0, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, 0.1, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -1.0, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -1.5, 1.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -0.1, 0.0, 0, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -0.1, 1.0, -0.1, 0), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -0.1, 1.0, 0, 1.01), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(1.0, -0.1, 1.0, 0, 0, -0.5), InvalidParameter);
        CHECK_THROWS_AS(ModelParams(NAN, -0.1, 1.0, 0, 0), InvalidParameter);
        CHECK_NOTHROW(ModelParams(1.0, -0.1, 1.0, 1.0, 1.0));
        CHECK(ModelParams::check(1.0, 0.1, 1.0, 0, 0, 0).has_value());
        CHECK_FALSE(ModelParams::check(1.0, -0.1, 1.0, 0, 0, 0).has_value());
    }
}

TEST_SUITE("field") {
    TEST_CASE("equilibria of the organizing center") {
        const ModelParams p = ModelParams::reference();
        CHECK(eval_field_4d(p, kO1) == Vec4d::Zero());
        CHECK(eval_field_4d(p, kO2) == Vec4d::Zero());
        const ModelParams q = ModelParams::reference(0.0, 0.7, 0.4);
        CHECK(eval_field_4d(q, kO1) == Vec4d::Zero());
        CHECK(eval_field_4d(q, kO2) == Vec4d::Zero());
    }

    TEST_CASE("tau1 moves the poles along x3") {
        const ModelParams p = ModelParams::reference(0.5, 0.3);
        CHECK(eval_field_4d(p, kO1) == Vec4d(0, 0, 0.5, 0));
        CHECK(eval_field_4d(p, kO2) == Vec4d(0, 0, -0.5, 0));
    }

    TEST_CASE("golden vector at (0.5, 0.2)") {
        // High-precision term-by-term evaluation rounded to double.
        const ModelParams p = ModelParams::reference(0.5, 0.2);
        const Vec4d f = eval_field_4d(p, Vec4d(0.1, 0.1, 0.0, -0.99));
        const Vec4d golden(-0.01081100000000000032, 0.18918900000000001078,
                           -0.48316949999999998663, 0.018118999999999986696);
        CHECK(max_abs_diff(f, golden) < 1e-15);
    }

    TEST_CASE("golden vector with the symmetry-breaking term") {
        const ModelParams p(1.0, -0.1, 1.0, 0.3, 0.4, 0.25);
        const Vec4d f = eval_field_4d(p, Vec4d(0.3, -0.5, 0.6, 0.2));
        const Vec4d golden(0.54020000000000000487, 0.25324999999999998104,
                           0.32280000000000000751, 0.029800000000000029432);
        CHECK(max_abs_diff(f, golden) < 1e-15);
    }

    TEST_CASE("Jacobian matches central differences") {
        for (double kappa : {0.0, 0.3}) {
            const ModelParams p(1.0, -0.1, 1.0, 0.4, 0.6, kappa);
            double worst = 0.0;
            for (const Vec4d& x : sphere_samples(100, 11)) {
                const Mat4d J = eval_jacobian_4d(p, x);
                const double h = 1e-6;
                for (int k = 0; k < 4; ++k) {
                    Vec4d e = Vec4d::Zero();
                    e(k) = h;
                    const Vec4d col = (eval_field_4d(p, Vec4d(x + e)) - eval_field_4d(p, Vec4d(x - e))) / (2 * h);
                    worst = std::max(worst, (J.col(k) - col).cwiseAbs().maxCoeff());
                }
            }
            CHECK(worst < 1e-6);
        }
    }

    TEST_CASE("eigenvalues at the poles") {
        const ModelParams p = ModelParams::reference();
        const double a = p.alpha(), b = p.beta(), w = p.omega();

        Eigen::EigenSolver<Eigen::Matrix3d> es1(eval_jacobian_4d(p, kO1).topLeftCorner<3, 3>());
        std::vector<std::complex<double>> ev1(es1.eigenvalues().begin(), es1.eigenvalues().end());
        std::sort(ev1.begin(), ev1.end(), [](auto x, auto y) { return x.imag() < y.imag(); });
        CHECK(std::abs(ev1[0] - std::complex<double>(-(a - b), -w)) < 1e-10);
        CHECK(std::abs(ev1[1] - std::complex<double>(a + b, 0)) < 1e-10);
        CHECK(std::abs(ev1[2] - std::complex<double>(-(a - b), w)) < 1e-10);
        CHECK(std::abs(ev1[1] - 0.9) < 1e-10);
        CHECK(std::abs(ev1[2] - std::complex<double>(-1.1, 1.0)) < 1e-10);

        Eigen::EigenSolver<Eigen::Matrix3d> es2(eval_jacobian_4d(p, kO2).topLeftCorner<3, 3>());
        std::vector<std::complex<double>> ev2(es2.eigenvalues().begin(), es2.eigenvalues().end());
        std::sort(ev2.begin(), ev2.end(), [](auto x, auto y) { return x.imag() < y.imag(); });
        CHECK(std::abs(ev2[0] - std::complex<double>(0.9, -1.0)) < 1e-10);
        CHECK(std::abs(ev2[1] - std::complex<double>(-1.1, 0)) < 1e-10);
        CHECK(std::abs(ev2[2] - std::complex<double>(0.9, 1.0)) < 1e-10);

        // Normal direction of the sphere.
        CHECK(eval_jacobian_4d(p, kO1)(3, 3) == doctest::Approx(-2.0).epsilon(1e-14));
    }

    TEST_CASE("quotient field") {
        const ModelParams p = ModelParams::reference();
        CHECK(eval_field_3d(p, Vec3d(0, 0, 1)) == Vec3d::Zero());
        CHECK(eval_field_3d(p, Vec3d(1, 0, 0)) == Vec3d(0, 0, 1));

        const Vec3d f = eval_field_3d(ModelParams::reference(0.5), Vec3d(0.4, 0.5, -0.6));
        const Vec3d golden(0.31760000000000001257, -0.31099999999999997213,
                           -0.34259999999999997732);
        CHECK(max_abs_diff(f, golden) < 1e-15);

        CHECK_THROWS_AS(eval_field_3d(ModelParams::reference(0.5, 0.1), Vec3d(0, 0, 1)),
                        QuotientInvalid);
        CHECK_THROWS_AS(eval_field_3d(ModelParams::reference(0.5, 0, 0.1), Vec3d(0, 0, 1)),
                        QuotientInvalid);
    }

    TEST_CASE("quotient map commutes with the field") {
        // d/dt sqrt(x1^2 + x2^2) along the 4D field equals the quotient rho'.
        const ModelParams p = ModelParams::reference(0.35);
        double worst = 0.0;
        for (const Vec4d& s : sphere_samples(200, 5)) {
            const Vec4d x = 0.8 * s;
            const Vec4d f = eval_field_4d(p, x);
            const double rho = std::hypot(x(0), x(1));
            const Vec3d lifted((x(0) * f(0) + x(1) * f(1)) / rho, f(2), f(3));
            worst = std::max(worst, max_abs_diff(lifted, eval_field_3d(p, to_quotient(x))));
        }
        CHECK(worst < 1e-14);
    }

    TEST_CASE("planar field") {
        const ModelParams p = ModelParams::reference();
        CHECK(eval_field_2d(p, Vec2d(0, 1)) == Vec2d::Zero());
        CHECK(eval_field_2d(p, Vec2d(0, -1)) == Vec2d::Zero());

        const ModelParams q = ModelParams::reference(0.5);
        CHECK(max_abs_diff(eval_field_2d(q, Vec2d(0, -0.99)),
                           Vec2d(-0.48514949999999998694, 0.017929900000000015753)) < 1e-15);
        CHECK(max_abs_diff(eval_field_2d(q, Vec2d(0.3, -0.4)),
                           Vec2d(-0.15680000000000000817, 0.60239999999999999076)) < 1e-15);

        double worst = 0.0;
        for (double x3 : {-0.7, 0.0, 0.4}) {
            for (double x4 : {-0.9, 0.1, 0.6}) {
                const Vec2d z(x3, x4);
                const Mat2d J = eval_jacobian_2d(q, z);
                const double h = 1e-6;
                for (int k = 0; k < 2; ++k) {
                    Vec2d e = Vec2d::Zero();
                    e(k) = h;
                    const Vec2d col = (eval_field_2d(q, Vec2d(z + e)) - eval_field_2d(q, Vec2d(z - e))) / (2 * h);
                    worst = std::max(worst, (J.col(k) - col).cwiseAbs().maxCoeff());
                }
            }
        }
        CHECK(worst < 1e-7);
    }

    TEST_CASE("x1 = x2 = 0 is invariant") {
        for (double t1 : {0.0, 0.3, 0.6}) {
            for (double t2 : {0.0, 0.3, 0.6}) {
                const ModelParams p = ModelParams::reference(t1, t2);
                for (double th = 0; th < 2 * kPi; th += 0.1) {
                    const Vec4d f = eval_field_4d(p, Vec4d(0, 0, std::cos(th), std::sin(th)));
                    CHECK(f(0) == 0.0);
                    CHECK(f(1) == 0.0);
                }
            }
        }
    }
}

TEST_SUITE("symmetry") {
    TEST_CASE("group actions") {
        const Vec4d x(0.1, -0.2, 0.3, 0.4);
        CHECK(group_apply(GroupElement::gamma2(), x) == Vec4d(0.1, -0.2, -0.3, 0.4));
        CHECK(group_apply(GroupElement::gamma_pi(), x) == Vec4d(-0.1, 0.2, 0.3, 0.4));
        CHECK(max_abs_diff(group_apply(GroupElement::rotation(kPi), x),
                           group_apply(GroupElement::gamma_pi(), x)) < 1e-16);
        CHECK(max_abs_diff(group_apply(GroupElement::rotation(2 * kPi), x), x) < 1e-16);
    }

    TEST_CASE("equivariance table") {
        CHECK(equivariance_defect(ModelParams::reference(), GroupElement::rotation(0.7), 1000, 1) < 1e-13);
        CHECK(equivariance_defect(ModelParams::reference(0.5), GroupElement::rotation(1.3), 1000, 2) < 1e-13);
        for (double t1 : {0.0, 0.5, 1.0}) {
            for (double t2 : {0.0, 0.5, 1.0}) {
                CHECK(equivariance_defect(ModelParams::reference(t1, t2), GroupElement::gamma_pi(), 1000, 3) < 1e-13);
            }
        }
        CHECK(equivariance_defect(ModelParams::reference(), GroupElement::gamma2(), 1000, 4) < 1e-13);
        // tau2 breaks rotations.
        CHECK(equivariance_defect(ModelParams::reference(0.0, 0.3), GroupElement::rotation(0.7), 1000, 5) > 1e-3);
        // Reported, not asserted, by the invariant suite; recorded here as nonzero.
        CHECK(equivariance_defect(ModelParams::reference(0.0, 0.3), GroupElement::gamma2(), 1000, 6) > 1e-3);
    }

    TEST_CASE("sphere samples are seeded and unit") {
        const auto a = sphere_samples(50, 9);
        const auto b = sphere_samples(50, 9);
        REQUIRE(a.size() == 50);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == b[i]);
            CHECK(std::abs(a[i].norm() - 1.0) < 1e-15);
        }
        CHECK(sphere_samples(50, 10)[0] != a[0]);
    }

    TEST_CASE("tangency") {
        for (double t1 : {0.0, 0.5, 1.0}) {
            for (double t2 : {0.0, 0.5, 1.0}) {
                const auto r = sphere_tangency_defect(ModelParams::reference(t1, t2), 10000, 7);
                CHECK(r.max_defect < 1e-12);
                CHECK_FALSE(r.tangency_not_guaranteed);
            }
        }
        CHECK(eval_field_4d(ModelParams::reference(0.7, 0.2), kO1).dot(kO1) == 0.0);
        const auto broken = sphere_tangency_defect(ModelParams::reference(0.0, 0.0, 0.3), 1000, 7);
        CHECK(broken.tangency_not_guaranteed);
        CHECK(broken.max_defect > 1e-3);
    }
}

TEST_SUITE("constants") {
    TEST_CASE("reference constants") {
        const DerivedConstants c = derived_constants(ModelParams::reference());
        CHECK(c.C1 == doctest::Approx(1.1).epsilon(1e-15));
        CHECK(c.E1 == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(c.delta1 == doctest::Approx(1.1 / 0.9).epsilon(1e-15));
        CHECK(c.delta == doctest::Approx(c.delta1 * c.delta2).epsilon(1e-15));
        CHECK(c.Komega == doctest::Approx(2.0 / 0.81).epsilon(1e-15));
        CHECK(c.K == doctest::Approx(2.0 / 0.81).epsilon(1e-15));
        CHECK(std::abs(c.Komega - 2.469136) < 1e-6);
        CHECK(derived_constants(ModelParams(1.0, -0.1, 2.0, 0, 0)).Komega ==
              doctest::Approx(4.0 / 0.81).epsilon(1e-15));
    }

    TEST_CASE("beta to zero from below") {
        const DerivedConstants c = derived_constants(ModelParams(1.0, -1e-12, 1.0, 0, 0));
        CHECK(std::abs(c.delta1 - 1.0) < 1e-11);
    }

    TEST_CASE("regime curves") {
        const double K = 2.0 / 0.81;
        CHECK(std::abs(h1_curve(K) - 0.375) < 5e-4);
        CHECK(std::abs(h2_curve(K) - 0.9996) < 5e-5);
        CHECK(h1_curve(1e8) < 1e-7);
        CHECK(h2_curve(1e-3) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(h2_curve(1e6) > 0.0);
        for (double k = 1e-3; k < 1e3; k *= 1.5) CHECK(h1_curve(k) < h2_curve(k));
        CHECK_THROWS_AS(h1_curve(0.0), DomainError);
        CHECK_THROWS_AS(h2_curve(-1.0), DomainError);
    }

    TEST_CASE("predicted regime") {
        const double K = 2.0 / 0.81;
        CHECK(predicted_regime(K, 0.1) == Regime::Torus);
        CHECK(predicted_regime(K, 0.5) == Regime::Transition);
        CHECK(predicted_regime(K, 2.0) == Regime::Horseshoe);
        CHECK(predicted_regime(ModelParams::reference(0.5, 0.05)) == Regime::Torus);
        CHECK(predicted_regime(ModelParams::reference(0.2, 0.6)) == Regime::Horseshoe);
        CHECK_THROWS_AS(predicted_regime(ModelParams::reference(0.0, 0.3)), DomainError);
        CHECK(to_string(Regime::Transition) == "Transition");
    }
}
