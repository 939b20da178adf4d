#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bykov/integrate.hpp"

using namespace bykov;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("validation") {
        CHECK_NOTHROW(IntegratorConfig{}.validate());
        IntegratorConfig c;
        c.rtol = 0.0;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c = {};
        c.atol = -1.0;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c = {};
        c.max_step = 0.0;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c = {};
        c.sample_dt = NAN;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c = {};
        c.t_transient = -1.0;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
    }
}

TEST_SUITE("stepper") {
    TEST_CASE("exponential decay") {
        IntegratorConfig cfg;
        cfg.sample_dt = 0.5;
        const auto tr = integrate_field<1>([](const VecN<1>& x) { return VecN<1>(-x); },
                                           VecN<1>(1.0), 10.0, cfg);
        REQUIRE(tr.size() == 21);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            CHECK(tr.times[k] == doctest::Approx(0.5 * k).epsilon(1e-15));
            CHECK(std::abs(tr.states[k](0) - std::exp(-tr.times[k])) < 1e-9);
        }
    }

    TEST_CASE("rotation with dense output") {
        auto rot = [](const Vec2d& x) { return Vec2d(-x(1), x(0)); };
        IntegratorConfig cfg;
        auto st = make_stepper<2>(rot, Vec2d(1, 0), 0.0, cfg);
        double worst = 0.0;
        while (st.t() < 20.0) {
            st.step(20.0);
            const auto& d = st.dense();
            for (int k = 0; k <= 4; ++k) {
                const double t = d.t0 + d.h * k / 4.0;
                worst = std::max(worst, (d(t) - Vec2d(std::cos(t), std::sin(t))).norm());
            }
        }
        CHECK(st.t() == 20.0);
        CHECK(worst < 1e-8);
    }

    TEST_CASE("non-finite field raises NumericalBlowup") {
        auto bad = [](const VecN<1>& x) {
            return VecN<1>(x(0) > 1.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0);
        };
        CHECK_THROWS_AS(integrate_field<1>(bad, VecN<1>(1.0), 5.0, IntegratorConfig{}),
                        NumericalBlowup);
    }

    TEST_CASE("finite-time singularity stalls or blows up") {
        auto sq = [](const VecN<1>& x) { return VecN<1>(x(0) * x(0)); };
        bool caught = false;
        try {
            integrate_field<1>(sq, VecN<1>(1.0), 2.0, IntegratorConfig{});
        } catch (const IntegrationStalled& e) {
            caught = true;
            CHECK(e.time() < 1.0);
            CHECK(e.time() > 0.99);
            CHECK(std::isfinite(e.last_good_state()[0]));
        } catch (const NumericalBlowup& e) {
            caught = true;
            CHECK(e.time() <= 1.0 + 1e-6);
        }
        CHECK(caught);
    }

    TEST_CASE("invalid horizon") {
        CHECK_THROWS_AS(integrate(ModelParams::reference(), kO1, 0.0, IntegratorConfig{}), InvalidParameter);
        CHECK_THROWS_AS(integrate(ModelParams::reference(), kO1, -1.0, IntegratorConfig{}), InvalidParameter);
    }
}

TEST_SUITE("model flow") {
    TEST_CASE("equilibrium stays put") {
        IntegratorConfig cfg;
        cfg.sample_dt = 1.0;
        const auto tr = integrate(ModelParams::reference(), kO1, 100.0, cfg);
        for (const auto& x : tr.states) CHECK(x == kO1);
    }

    TEST_CASE("attraction to the sphere") {
        IntegratorConfig cfg;
        cfg.sample_dt = 1.0;
        for (double r0 : {0.5, 1.5}) {
            const Vec4d x0 = r0 * Vec4d(0.5, -0.5, 0.5, 0.5);
            const auto tr = integrate(ModelParams::reference(), x0, 50.0, cfg);
            CHECK(std::abs(tr.states.back().squaredNorm() - 1.0) < 1e-6);
        }
    }

    TEST_CASE("orbit on the invariant circle reaches O2") {
        IntegratorConfig cfg;
        cfg.sample_dt = 1.0;
        const auto tr = integrate(ModelParams::reference(), Vec4d(0, 0, 0.01, 0.99), 10000.0, cfg);
        double off = 0.0;
        for (const auto& x : tr.states) off = std::max({off, std::abs(x(0)), std::abs(x(1))});
        CHECK(off < 1e-9);
        CHECK((tr.states.back() - kO2).norm() < 1e-6);
    }

    TEST_CASE("projection keeps samples on the sphere") {
        IntegratorConfig cfg;
        cfg.project_to_sphere = true;
        cfg.sample_dt = 0.5;
        const auto tr = integrate(ModelParams::reference(0.3, 0.4), Vec4d(0.1, 0.1, 0, -0.99).normalized(),
                                  200.0, cfg);
        for (const auto& x : tr.states) CHECK(std::abs(x.norm() - 1.0) < 1e-15);
    }

    TEST_CASE("quotient and planar overloads") {
        IntegratorConfig cfg;
        cfg.sample_dt = 1.0;
        CHECK_THROWS_AS(integrate(ModelParams::reference(0.1, 0.1), Vec3d(0.1, 0.1, 0.9), 1.0, cfg),
                        QuotientInvalid);
        const auto tr = integrate(ModelParams::reference(0.5), Vec2d(0, -0.99), 100.0, cfg);
        CHECK(tr.states.back().allFinite());
        CHECK(tr.params.has_value());
        cfg.project_to_sphere = true;
        CHECK_THROWS_AS(integrate(ModelParams::reference(0.5), Vec2d(0, -0.99), 1.0, cfg),
                        InvalidParameter);
    }

    TEST_CASE("trajectory csv") {
        IntegratorConfig cfg;
        cfg.sample_dt = 0.25;
        const auto tr = integrate(ModelParams::reference(0.5), Vec4d(0.1, 0.1, 0, -0.99), 1.0, cfg);
        std::ostringstream os;
        write_trajectory_csv(os, tr);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        CHECK(line == "t,x1,x2,x3,x4");
        int rows = 0;
        while (std::getline(is, line)) {
            double v[5];
            char c;
            std::istringstream ls(line);
            ls >> v[0] >> c >> v[1] >> c >> v[2] >> c >> v[3] >> c >> v[4];
            for (int k = 0; k < 4; ++k) CHECK(v[k + 1] == tr.states[rows](k));
            CHECK(v[0] == tr.times[rows]);
            ++rows;
        }
        CHECK(rows == 5);
        CHECK(trajectory_header(3) == "t,rho,x3,x4");
        CHECK(trajectory_header(2) == "t,x3,x4");
    }
}

TEST_SUITE("events") {
    TEST_CASE("harmonic oscillator crossings") {
        auto rot = [](const Vec2d& x) { return Vec2d(-x(1), x(0)); };
        Section<2> s;
        s.normal = Vec2d(0, 1);
        s.direction = Direction::Increasing;
        // The horizon sits just past 10 pi so the last crossing is not at the endpoint.
        // Tight tolerances keep the radial drift of the integrator below the check.
        IntegratorConfig tight;
        tight.rtol = 1e-12;
        tight.atol = 1e-14;
        const auto hits = detect_crossings<2>(rot, Vec2d(1, 0), 10 * kPi + 0.1, tight, s, 1e-12);
        REQUIRE(hits.size() == 5);
        for (int k = 0; k < 5; ++k) {
            CHECK(std::abs(hits[k].t - 2 * kPi * (k + 1)) < 1e-9);
            CHECK((hits[k].x - Vec2d(1, 0)).norm() < 1e-9);
        }

        s.direction = Direction::Decreasing;
        const auto down = detect_crossings<2>(rot, Vec2d(1, 0), 10 * kPi + 0.1, IntegratorConfig{}, s, 1e-12);
        REQUIRE(down.size() == 5);
        CHECK(std::abs(down[0].t - kPi) < 1e-9);

        s.direction = Direction::Both;
        CHECK(detect_crossings<2>(rot, Vec2d(1, 0), 10 * kPi + 0.1, IntegratorConfig{}, s, 1e-12).size() == 10);

        s.direction = Direction::Increasing;
        CHECK(detect_crossings<2>(rot, Vec2d(1, 0), 10 * kPi + 0.1, IntegratorConfig{}, s, 1e-12, 3 * kPi).size() == 4);

        s.direction = Direction::Both;
        s.half_space = Vec2d(-1, 0);
        const auto left = detect_crossings<2>(rot, Vec2d(1, 0), 10 * kPi + 0.1, IntegratorConfig{}, s, 1e-12);
        REQUIRE(left.size() == 5);
        CHECK(left[0].x(0) < 0);
    }

    TEST_CASE("stopping sink") {
        auto rot = [](const Vec2d& x) { return Vec2d(-x(1), x(0)); };
        Section<2> s;
        s.normal = Vec2d(0, 1);
        int n = 0;
        detect_crossings<2>(rot, Vec2d(1, 0), 100.0, IntegratorConfig{}, s, 1e-12, 0.0,
                            [&](const Crossing<2>&) { return ++n < 3; });
        CHECK(n == 3);
    }

    TEST_CASE("flow inside x1 = x2 = 0 never crosses the default section") {
        const auto hits = detect_crossings(ModelParams::reference(0.4, 0.4), Vec4d(0, 0, 0.6, -0.8),
                                           500.0, IntegratorConfig{}, default_section(), 1e-12);
        CHECK(hits.empty());
    }

    TEST_CASE("model crossings satisfy the section") {
        const SectionSpec s = default_section();
        const auto hits = detect_crossings(ModelParams::reference(0.5), Vec4d(0.1, 0.1, 0, -0.99),
                                           300.0, IntegratorConfig{}, s, 1e-12);
        REQUIRE(hits.size() > 20);
        for (std::size_t k = 0; k < hits.size(); ++k) {
            CHECK(std::abs(hits[k].x(1)) < 1e-12);
            CHECK(hits[k].x(0) > 0);
            if (k > 0) CHECK(hits[k].t > hits[k - 1].t);
        }
    }

    TEST_CASE("invalid section") {
        SectionSpec s = default_section();
        s.normal = Vec4d::Zero();
        CHECK_THROWS_AS(detect_crossings(ModelParams::reference(), Vec4d(0.1, 0.1, 0, -0.99), 10.0,
                                         IntegratorConfig{}, s, 1e-12),
                        InvalidParameter);
        CHECK_THROWS_AS(detect_crossings(ModelParams::reference(), Vec4d(0.1, 0.1, 0, -0.99), 10.0,
                                         IntegratorConfig{}, default_section(), 0.0),
                        InvalidParameter);
    }
}
