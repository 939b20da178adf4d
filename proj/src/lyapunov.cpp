#include "bykov/lyapunov.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

namespace bykov {

void LyapunovSettings::validate(const IntegratorConfig& cfg) const {
    cfg.validate();
    if (!(T > cfg.t_transient)) throw InvalidParameter("T must exceed t_transient");
    if (!(gs_interval > 0.0)) throw InvalidParameter("gs_interval must be > 0");
    if (!(zero_tol > 0.0)) throw InvalidParameter("zero_tol must be > 0");
    if (!(convergence_tol > 0.0)) throw InvalidParameter("convergence_tol must be > 0");
}

std::string to_string(AttractorLabel label) {
    switch (label) {
        case AttractorLabel::FixedPoint:
            return "FixedPoint";
        case AttractorLabel::LimitCycle:
            return "LimitCycle";
        case AttractorLabel::TorusOrChaos:
            return "TorusOrChaos";
    }
    return "?";
}

std::string color_name(AttractorLabel label) {
    switch (label) {
        case AttractorLabel::FixedPoint:
            return "red";
        case AttractorLabel::LimitCycle:
            return "blue";
        case AttractorLabel::TorusOrChaos:
            return "yellow";
    }
    return "?";
}

namespace detail {

SpectrumResult finish_spectrum(const Vec4d& log_sums, double averaging_time,
                               const std::vector<Vec4d>& running, double max_frame_defect,
                               const LyapunovSettings& s) {
    SpectrumResult r;
    std::array<double, 4> raw{};
    for (int i = 0; i < 4; ++i) raw[static_cast<std::size_t>(i)] = log_sums(i) / averaging_time;
    std::sort(raw.begin(), raw.end(), std::greater<>());
    r.raw = raw;
    r.exponents = {raw[0], raw[1], raw[2]};
    r.radial_exponent = raw[3];
    r.T_total = s.T;
    r.gs_interval = s.gs_interval;
    r.max_frame_defect = max_frame_defect;

    const std::size_t n = running.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double variation = 0.0;
    if (n > 0) {
        Vec4d lo = running[n - tail];
        Vec4d hi = lo;
        for (std::size_t k = n - tail; k < n; ++k) {
            lo = lo.cwiseMin(running[k]);
            hi = hi.cwiseMax(running[k]);
        }
        variation = (hi - lo).maxCoeff();
    }
    r.tail_variation = variation;
    r.converged = std::isfinite(variation) && variation < s.convergence_tol;
    return r;
}

}  // namespace detail

SpectrumResult spectrum(const ModelParams& p, const Vec4d& x0, const LyapunovSettings& s,
                        IntegratorConfig cfg) {
    cfg.project_to_sphere = true;
    return spectrum_of([&p](const Vec4d& x) { return eval_field_4d(p, x); },
                       [&p](const Vec4d& x) { return eval_jacobian_4d(p, x); }, x0, s, cfg);
}

AttractorClass classify_exponents(const std::array<double, 3>& exponents, double zero_tol) {
    if (!(zero_tol > 0.0)) throw InvalidParameter("zero_tol must be > 0");
    int nonneg = 0;
    for (double l : exponents) {
        if (!std::isfinite(l)) throw Unconverged("non-finite exponent");
        if (l > zero_tol || std::abs(l) <= zero_tol) ++nonneg;
    }
    AttractorClass c{};
    c.nonneg_count = nonneg;
    if (nonneg == 0) {
        c.label = AttractorLabel::FixedPoint;
        c.color = {255, 0, 0};
    } else if (nonneg == 1) {
        c.label = AttractorLabel::LimitCycle;
        c.color = {0, 0, 255};
    } else {
        c.label = AttractorLabel::TorusOrChaos;
        c.color = {255, 255, 0};
    }
    c.positive_lambda1 = *std::max_element(exponents.begin(), exponents.end()) > 3.0 * zero_tol;
    return c;
}

AttractorClass classify(const SpectrumResult& s, double zero_tol, bool allow_unconverged) {
    if (!s.converged && !allow_unconverged) {
        throw Unconverged("spectrum not converged (tail variation " +
                          std::to_string(s.tail_variation) + ")");
    }
    return classify_exponents(s.exponents, zero_tol);
}

std::string spectrum_csv_header() { return "tau1,tau2,lambda1,lambda2,lambda3,radial,nonneg,class"; }

std::string spectrum_csv_row(double tau1, double tau2, const SpectrumResult& s,
                             const AttractorClass& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s", tau1, tau2,
                  s.exponents[0], s.exponents[1], s.exponents[2], s.radial_exponent,
                  c.nonneg_count, color_name(c.label).c_str());
    return buf;
}

}  // namespace bykov
