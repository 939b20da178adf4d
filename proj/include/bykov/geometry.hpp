#pragma once

// Return-map analytics: section portraits, rotation numbers, and periodic
// orbits of the planar reduced system.

#include <iosfwd>
#include <span>
#include <vector>

#include "bykov/integrate.hpp"
#include "bykov/model.hpp"

namespace bykov {

/// Time-ordered section hits and the unwrapped phase of each hit.
struct ReturnSeries {
    std::vector<Crossing<4>> hits;
    std::vector<double> angles;

    /// Phase of each hit in the plane of coordinates (i, j), measured around
    /// the centroid of all hits in that plane.
    static ReturnSeries from_hits(std::vector<Crossing<4>> hits, int i = 2, int j = 3);
    /// Unwraps raw phases so consecutive differences lie in (-pi, pi].
    static ReturnSeries from_angles(std::span<const double> raw);
};

struct RotationEstimate {
    /// Rotation per return in turns, reduced to [0, 1).
    double estimate;
    double std_error;
};

/// Least-squares slope of the unwrapped phase against hit index, over 2 pi.
/// Throws InsufficientData for fewer than 10 hits.
RotationEstimate rotation_number(const ReturnSeries& rs);

/// Denominators of the continued-fraction convergents of x (at most max_terms).
std::vector<long long> convergent_denominators(double x, int max_terms = 12);

struct LimitCycle2D {
    double period;
    Vec2d section_point;
    /// Derivative of the return map to the section at the fixed point.
    double floquet_estimate;
};

struct CycleSearchOptions {
    double transient = 200.0;
    /// Successive section points closer than this fix the cycle.
    double match_tol = 1e-8;
    /// Returns averaged for the period once the cycle is fixed.
    int confirm_returns = 4;
    double fd_step = 1e-6;
};

/// Periodic orbit of a planar field through the section {z0 = 0, z0' > 0}.
/// Throws NoCycleFound if no recurrence is fixed within t_search.
template <class Field>
LimitCycle2D find_limit_cycle(Field field, const Vec2d& z0, double t_search,
                              const IntegratorConfig& cfg, const CycleSearchOptions& opt = {}) {
    Section<2> sec;
    sec.normal = Vec2d(1.0, 0.0);
    sec.direction = Direction::Increasing;
    constexpr double refine = 1e-13;

    std::vector<Crossing<2>> hits;
    detect_crossings<2>(field, z0, t_search, cfg, sec, refine, opt.transient,
                        [&](const Crossing<2>& c) {
                            const bool match = !hits.empty() &&
                                               std::abs(c.x(1) - hits.back().x(1)) < opt.match_tol;
                            if (!match) hits.clear();
                            hits.push_back(c);
                            return !match;
                        });
    if (hits.size() < 2) {
        throw NoCycleFound("no recurrent section point within t_search = " +
                           std::to_string(t_search));
    }
    // Returns that merely contract onto a focus are not a cycle.
    if (field(hits.back().x).norm() < 1e-6) {
        throw NoCycleFound("section returns converge to an equilibrium");
    }

    // Average the return time over further revolutions from the fixed point.
    const double horizon = 2.0 * (opt.confirm_returns + 1) * (hits[1].t - hits[0].t) + 10.0;
    int returns = 0;
    double t_last = 0.0;
    Vec2d last(0.0, hits.back().x(1));
    detect_crossings<2>(field, last, horizon, cfg, sec, refine, 0.0, [&](const Crossing<2>& c) {
        t_last = c.t;
        last = c.x;
        return ++returns < opt.confirm_returns;
    });
    if (returns < opt.confirm_returns) {
        throw NoCycleFound("cycle lost while confirming the period");
    }

    const double return_horizon = 2.0 * t_last / returns + 10.0;
    auto first_return = [&](double x4) {
        std::optional<double> out;
        detect_crossings<2>(field, Vec2d(0.0, x4), return_horizon, cfg, sec, refine, 0.0,
                            [&](const Crossing<2>& c) {
                                out = c.x(1);
                                return false;
                            });
        if (!out) throw NoCycleFound("return map undefined near the cycle");
        return *out;
    };
    const double x4 = last(1);
    const double dp = first_return(x4 + opt.fd_step);
    const double dm = first_return(x4 - opt.fd_step);

    LimitCycle2D lc;
    lc.period = t_last / returns;
    lc.section_point = Vec2d(0.0, x4);
    lc.floquet_estimate = (dp - dm) / (2.0 * opt.fd_step);
    return lc;
}

/// Stable periodic orbit of the planar reduced system.
LimitCycle2D find_limit_cycle_2d(const ModelParams& p, const Vec2d& z0 = Vec2d(0.0, -0.99),
                                 double t_search = 5000.0, const IntegratorConfig& cfg = {},
                                 const CycleSearchOptions& opt = {});

/// Section hits of the 4D flow at or after t_from.
std::vector<Crossing<4>> section_portrait(const ModelParams& p, const Vec4d& x0, double t_end,
                                          const SectionSpec& s, const IntegratorConfig& cfg = {},
                                          double t_from = 0.0, double refine_tol = 1e-12);

/// Portrait CSV: header `t,x3,x4`, 17 significant digits.
void write_portrait_csv(std::ostream& os, std::span<const Crossing<4>> hits);

/// Symmetric Hausdorff distance between two planar point sets.
double hausdorff_distance(std::span<const Vec2d> a, std::span<const Vec2d> b);

/// (x3, x4) projection of section hits.
std::vector<Vec2d> project_x3x4(std::span<const Crossing<4>> hits);

}  // namespace bykov
