#include "bykov/geometry.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace bykov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps d into (-pi, pi].
double wrap(double d) {
    d = std::remainder(d, kTwoPi);
    if (d <= -std::numbers::pi) d += kTwoPi;
    return d;
}

}  // namespace

ReturnSeries ReturnSeries::from_angles(std::span<const double> raw) {
    ReturnSeries rs;
    rs.angles.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        if (k == 0) {
            rs.angles.push_back(raw[0]);
        } else {
            rs.angles.push_back(rs.angles.back() + wrap(raw[k] - raw[k - 1]));
        }
    }
    return rs;
}

ReturnSeries ReturnSeries::from_hits(std::vector<Crossing<4>> hits, int i, int j) {
    if (i < 0 || i > 3 || j < 0 || j > 3 || i == j) {
        throw InvalidParameter("phase coordinates must be two distinct indices in [0, 3]");
    }
    Vec2d c = Vec2d::Zero();
    for (const auto& h : hits) c += Vec2d(h.x(i), h.x(j));
    if (!hits.empty()) c /= static_cast<double>(hits.size());
    std::vector<double> raw;
    raw.reserve(hits.size());
    for (const auto& h : hits) raw.push_back(std::atan2(h.x(j) - c(1), h.x(i) - c(0)));
    ReturnSeries rs = from_angles(raw);
    rs.hits = std::move(hits);
    return rs;
}

RotationEstimate rotation_number(const ReturnSeries& rs) {
    const std::size_t n = rs.angles.size();
    if (n < 10) throw InsufficientData("rotation number needs at least 10 hits");

    // Slope of angle against index by least squares with a centered abscissa.
    const double nd = static_cast<double>(n);
    const double mean_i = 0.5 * (nd - 1.0);
    double mean_a = 0.0;
    for (double a : rs.angles) mean_a += a;
    mean_a /= nd;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = static_cast<double>(k) - mean_i;
        sxx += dx * dx;
        sxy += dx * (rs.angles[k] - mean_a);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = rs.angles[k] - mean_a - slope * (static_cast<double>(k) - mean_i);
        ss += r * r;
    }
    const double se = std::sqrt(ss / (nd - 2.0) / sxx);

    double turns = slope / kTwoPi;
    turns -= std::floor(turns);
    if (turns >= 1.0) turns -= 1.0;
    return {turns, se / kTwoPi};
}

std::vector<long long> convergent_denominators(double x, int max_terms) {
    std::vector<long long> q;
    long long q_prev = 0, q_cur = 1;
    double frac = x - std::floor(x);
    for (int k = 0; k < max_terms; ++k) {
        q.push_back(q_cur);
        if (frac < 1e-12) break;
        const double inv = 1.0 / frac;
        // Snap near-integers so exact rationals terminate despite rounding.
        const double a = std::floor(inv + 1e-9);
        if (a > 1e9) break;
        const long long q_next = static_cast<long long>(a) * q_cur + q_prev;
        q_prev = q_cur;
        q_cur = q_next;
        frac = std::max(0.0, inv - a);
    }
    return q;
}

LimitCycle2D find_limit_cycle_2d(const ModelParams& p, const Vec2d& z0, double t_search,
                                 const IntegratorConfig& cfg, const CycleSearchOptions& opt) {
    return find_limit_cycle([&p](const Vec2d& z) { return eval_field_2d(p, z); }, z0, t_search,
                            cfg, opt);
}

std::vector<Crossing<4>> section_portrait(const ModelParams& p, const Vec4d& x0, double t_end,
                                          const SectionSpec& s, const IntegratorConfig& cfg,
                                          double t_from, double refine_tol) {
    return detect_crossings(p, x0, t_end, cfg, s, refine_tol, t_from);
}

void write_portrait_csv(std::ostream& os, std::span<const Crossing<4>> hits) {
    os << "t,x3,x4\n";
    for (const auto& h : hits) {
        const double xy[2] = {h.x(2), h.x(3)};
        write_csv_row(os, h.t, xy, 2);
    }
}

double hausdorff_distance(std::span<const Vec2d> a, std::span<const Vec2d> b) {
    if (a.empty() || b.empty()) throw InsufficientData("Hausdorff distance of an empty set");
    auto directed = [](std::span<const Vec2d> from, std::span<const Vec2d> to) {
        double worst = 0.0;
        for (const Vec2d& u : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2d& v : to) best = std::min(best, (u - v).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<Vec2d> project_x3x4(std::span<const Crossing<4>> hits) {
    std::vector<Vec2d> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.emplace_back(h.x(2), h.x(3));
    return out;
}

}  // namespace bykov
