#pragma once

// Adaptive Dormand-Prince 5(4) integration with continuous (dense) output,
// optional renormalization onto the unit sphere, and hyperplane events.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "bykov/errors.hpp"
#include "bykov/model.hpp"

namespace bykov {

template <int N> using VecN = Eigen::Matrix<double, N, 1>;

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = 0.1;
    bool project_to_sphere = false;
    double t_transient = 500.0;
    double sample_dt = 0.01;

    /// Throws InvalidParameter on a non-positive tolerance/step/sample interval.
    void validate() const;
};

/// Interpolating polynomial of one accepted step, valid on [t0, t0 + h].
template <int N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    VecN<N> r1, r2, r3, r4, r5;

    double t1() const { return t0 + h; }

    VecN<N> operator()(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

/// Renormalizes the leading four components onto the unit sphere.
struct SphereProjection {
    template <int N>
    void operator()(VecN<N>& y) const {
        static_assert(N >= 4);
        const double nrm = std::sqrt(y(0) * y(0) + y(1) * y(1) + y(2) * y(2) + y(3) * y(3));
        if (nrm > 0.0) y.template head<4>() /= nrm;
    }
};

struct NoProjection {
    template <int N>
    void operator()(VecN<N>&) const {}
};

/// Dormand-Prince 5(4) stepper. `Field` is callable as VecN<N>(const VecN<N>&).
///
/// Each call to step() performs exactly one accepted step. The error norm is
/// the RMS of e_i / (atol + rtol max(|y_i|, |y_new_i|)) over all components.
template <int N, class Field>
class DormandPrince {
public:
    using State = VecN<N>;

    DormandPrince(Field field, const State& y0, double t0, const IntegratorConfig& cfg)
        : f_(std::move(field)), cfg_(cfg), t_(t0), y_(y0) {
        cfg_.validate();
        check_finite(y_, t_);
        k1_ = f_(y_);
        h_ = initial_step();
    }

    double t() const { return t_; }
    const State& y() const { return y_; }
    const DenseStep<N>& dense() const { return dense_; }
    double next_step_size() const { return h_; }

    /// Replaces the state at the current time (after an external projection or
    /// reorthonormalization). The cached derivative is recomputed.
    void reset_state(const State& y) {
        y_ = y;
        k1_ = f_(y_);
    }

    /// Advances by one accepted step that does not overshoot t_limit.
    template <class Projector = NoProjection>
    void step(double t_limit, Projector project = {}) {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                         a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                         d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                         d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

        if (!(t_limit > t_)) throw InvalidParameter("step target must lie ahead of t");
        bool rejected = false;
        for (;;) {
            double h = std::min({h_, cfg_.max_step, t_limit - t_});
            // Never leave a sliver before t_limit that would stall the next step.
            if (t_limit - t_ - h < 0.01 * h) {
                h = t_limit - t_ <= cfg_.max_step ? t_limit - t_ : 0.5 * (t_limit - t_);
            }
            const bool clipped = h == t_limit - t_;
            const double min_h = 16.0 * std::numeric_limits<double>::epsilon() *
                                 std::max(1.0, std::abs(t_));
            if (h < min_h) {
                throw IntegrationStalled("step size underflow", t_,
                                         std::vector<double>(y_.data(), y_.data() + N));
            }

            const State k2 = f_(State(y_ + h * (a21 * k1_)));
            const State k3 = f_(State(y_ + h * (a31 * k1_ + a32 * k2)));
            const State k4 = f_(State(y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3)));
            const State k5 = f_(State(y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4)));
            const State k6 =
                f_(State(y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
            const State y5 = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            const State k7 = f_(y5);
            const State err = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double acc = 0.0;
            for (int i = 0; i < N; ++i) {
                const double sc =
                    cfg_.atol + cfg_.rtol * std::max(std::abs(y_(i)), std::abs(y5(i)));
                const double q = err(i) / sc;
                acc += q * q;
            }
            const double enorm = std::sqrt(acc / N);
            if (!std::isfinite(enorm)) {
                // A non-finite trial is treated as a rejection so the step can shrink.
                h_ = h * 0.1;
                rejected = true;
                if (h_ < min_h) throw NumericalBlowup("non-finite state during step", t_);
                continue;
            }

            if (enorm <= 1.0) {
                dense_.t0 = t_;
                dense_.h = h;
                dense_.r1 = y_;
                dense_.r2 = y5 - y_;
                dense_.r3 = h * k1_ - dense_.r2;
                dense_.r4 = dense_.r2 - h * k7 - dense_.r3;
                dense_.r5 = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

                t_ = clipped ? t_limit : t_ + h;
                y_ = y5;
                check_finite(y_, t_);
                if constexpr (std::is_same_v<Projector, NoProjection>) {
                    k1_ = k7;
                } else {
                    project(y_);
                    k1_ = f_(y_);
                }

                double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 10.0;
                fac = std::clamp(fac, 0.2, 10.0);
                if (rejected) fac = std::min(fac, 1.0);
                // Clipped steps say nothing about the natural step length.
                h_ = clipped ? std::max(h_, h * fac) : h * fac;
                return;
            }
            h_ = h * std::max(0.2, 0.9 * std::pow(enorm, -0.2));
            rejected = true;
        }
    }

private:
    static void check_finite(const State& y, double t) {
        if (!y.allFinite()) throw NumericalBlowup("non-finite state", t);
    }

    double initial_step() const {
        State sc;
        for (int i = 0; i < N; ++i) sc(i) = cfg_.atol + cfg_.rtol * std::abs(y_(i));
        const double d0 = std::sqrt((y_.array() / sc.array()).square().mean());
        const double d1 = std::sqrt((k1_.array() / sc.array()).square().mean());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, cfg_.max_step);
        const State y1 = y_ + h0 * k1_;
        const State k2 = f_(y1);
        const double d2 = std::sqrt(((k2 - k1_).array() / sc.array()).square().mean()) / h0;
        const double dm = std::max(d1, d2);
        const double h1 =
            dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
        return std::min({100.0 * h0, h1, cfg_.max_step});
    }

    Field f_;
    IntegratorConfig cfg_;
    double t_;
    State y_;
    State k1_;
    double h_ = 0.0;
    DenseStep<N> dense_;
};

template <int N, class Field>
DormandPrince<N, Field> make_stepper(Field field, const VecN<N>& y0, double t0,
                                     const IntegratorConfig& cfg) {
    return DormandPrince<N, Field>(std::move(field), y0, t0, cfg);
}

// ---------------------------------------------------------------------------
// Sampled trajectories.

template <int N>
struct Trajectory {
    std::vector<double> times;
    std::vector<VecN<N>> states;
    std::optional<ModelParams> params;
    IntegratorConfig config;

    std::size_t size() const { return times.size(); }
};

using Trajectory4 = Trajectory<4>;

/// Integrates `field` from (0, x0) to t_end and calls sink(t, x) at every
/// t = k * sample_dt <= t_end using dense output. With project_to_sphere
/// (N = 4 only) each accepted step and each emitted sample is renormalized.
template <int N, class Field, class Sink>
VecN<N> integrate_field(Field field, const VecN<N>& x0, double t_end,
                        const IntegratorConfig& cfg, Sink&& sink) {
    cfg.validate();
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be > 0");
    if (cfg.project_to_sphere && N != 4) {
        throw InvalidParameter("project_to_sphere only applies to the 4D system");
    }
    auto stepper = make_stepper<N>(std::move(field), x0, 0.0, cfg);
    const auto n_samples = static_cast<long long>(std::floor(t_end / cfg.sample_dt + 1e-9));
    long long k = 0;
    auto emit = [&](double t, VecN<N> x) {
        if constexpr (N == 4) {
            if (cfg.project_to_sphere) SphereProjection{}(x);
        }
        sink(t, x);
    };
    emit(0.0, x0);
    k = 1;
    while (stepper.t() < t_end) {
        if constexpr (N == 4) {
            if (cfg.project_to_sphere) {
                stepper.step(t_end, SphereProjection{});
            } else {
                stepper.step(t_end);
            }
        } else {
            stepper.step(t_end);
        }
        const DenseStep<N>& d = stepper.dense();
        while (k <= n_samples) {
            const double ts = static_cast<double>(k) * cfg.sample_dt;
            if (ts > d.t1()) break;
            emit(ts, ts == d.t1() ? stepper.y() : d(ts));
            ++k;
        }
    }
    return stepper.y();
}

template <int N, class Field>
Trajectory<N> integrate_field(Field field, const VecN<N>& x0, double t_end,
                              const IntegratorConfig& cfg) {
    Trajectory<N> traj;
    traj.config = cfg;
    integrate_field<N>(std::move(field), x0, t_end, cfg, [&](double t, const VecN<N>& x) {
        traj.times.push_back(t);
        traj.states.push_back(x);
    });
    return traj;
}

/// Model trajectories for the 4D system, the 3D quotient, and the planar reduction.
Trajectory<4> integrate(const ModelParams& p, const Vec4d& x0, double t_end,
                        const IntegratorConfig& cfg);
Trajectory<3> integrate(const ModelParams& p, const Vec3d& y0, double t_end,
                        const IntegratorConfig& cfg);
Trajectory<2> integrate(const ModelParams& p, const Vec2d& z0, double t_end,
                        const IntegratorConfig& cfg);

/// CSV with header `t,x1,x2,x3,x4` (4D), `t,rho,x3,x4` (3D) or `t,x3,x4` (2D).
template <int N>
void write_trajectory_csv(std::ostream& os, const Trajectory<N>& traj);

/// Column header for a trajectory of the given dimension.
std::string trajectory_header(int dim);

/// One CSV row: fields printed with 17 significant digits.
void write_csv_row(std::ostream& os, double t, const double* x, int n);

// ---------------------------------------------------------------------------
// Hyperplane sections and crossing events.

enum class Direction { Increasing, Decreasing, Both };

/// Oriented hyperplane n . x = c with an optional half-space filter h . x > 0.
template <int N>
struct Section {
    VecN<N> normal;
    double offset = 0.0;
    Direction direction = Direction::Increasing;
    std::optional<VecN<N>> half_space;

    double g(const VecN<N>& x) const { return normal.dot(x) - offset; }
    void validate() const {
        if (!(normal.norm() > 0.0)) throw InvalidParameter("section normal must be nonzero");
    }
};

using SectionSpec = Section<4>;

/// x2 = 0 crossed upwards with x1 > 0; hits are read in the (x3, x4) plane.
SectionSpec default_section();

template <int N>
struct Crossing {
    double t;
    VecN<N> x;
};

/// Scans one accepted step for sign changes of g matching the section's
/// direction; each is refined by bisection on the dense polynomial until
/// |g| < refine_tol (or the bracket collapses to adjacent doubles).
template <int N>
std::optional<Crossing<N>> find_crossing(const DenseStep<N>& d, const VecN<N>& y_end,
                                         const Section<N>& s, double refine_tol) {
    const double g0 = s.g(d.r1);
    const double g1 = s.g(y_end);
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    const bool wanted = (s.direction == Direction::Increasing && up) ||
                        (s.direction == Direction::Decreasing && down) ||
                        (s.direction == Direction::Both && (up || down));
    if (!wanted) return std::nullopt;

    double lo = d.t0, hi = d.t1();
    double glo = g0;
    Crossing<N> c{hi, y_end};
    if (std::abs(g1) >= refine_tol) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const VecN<N> xm = d(mid);
            const double gm = s.g(xm);
            c = {mid, xm};
            if (std::abs(gm) < refine_tol) break;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
    }
    if (s.half_space && !(s.half_space->dot(c.x) > 0.0)) return std::nullopt;
    return c;
}

template <class Projector, int N, class Field>
void step_with(DormandPrince<N, Field>& stepper, double t_limit, bool project) {
    if constexpr (N == 4) {
        if (project) {
            stepper.step(t_limit, Projector{});
            return;
        }
    }
    stepper.step(t_limit);
}

/// Live event detection: integrates field from (0, x0) to t_end and reports
/// every section crossing with t >= t_from, in time order. A sink returning
/// bool stops the integration when it returns false.
template <int N, class Field, class Sink>
void detect_crossings(Field field, const VecN<N>& x0, double t_end, const IntegratorConfig& cfg,
                      const Section<N>& s, double refine_tol, double t_from, Sink&& sink) {
    s.validate();
    if (!(refine_tol > 0.0)) throw InvalidParameter("refine_tol must be > 0");
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be > 0");
    auto stepper = make_stepper<N>(std::move(field), x0, 0.0, cfg);
    while (stepper.t() < t_end) {
        step_with<SphereProjection>(stepper, t_end, cfg.project_to_sphere);
        if (stepper.t() < t_from) continue;
        auto c = find_crossing(stepper.dense(), stepper.dense()(stepper.t()), s, refine_tol);
        if (!c || c->t < t_from) continue;
        if constexpr (std::is_same_v<std::invoke_result_t<Sink&, const Crossing<N>&>, bool>) {
            if (!sink(*c)) return;
        } else {
            sink(*c);
        }
    }
}

template <int N, class Field>
std::vector<Crossing<N>> detect_crossings(Field field, const VecN<N>& x0, double t_end,
                                          const IntegratorConfig& cfg, const Section<N>& s,
                                          double refine_tol, double t_from = 0.0) {
    std::vector<Crossing<N>> out;
    detect_crossings<N>(std::move(field), x0, t_end, cfg, s, refine_tol, t_from,
                        [&](const Crossing<N>& c) { out.push_back(c); });
    return out;
}

/// Crossings of the 4D model flow.
std::vector<Crossing<4>> detect_crossings(const ModelParams& p, const Vec4d& x0, double t_end,
                                          const IntegratorConfig& cfg, const SectionSpec& s,
                                          double refine_tol, double t_from = 0.0);

}  // namespace bykov
