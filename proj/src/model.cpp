#include "bykov/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace bykov {

std::optional<std::string> ModelParams::check(double alpha, double beta, double omega,
                                              double tau1, double tau2, double kappa) {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(alpha) || !finite(beta) || !finite(omega) || !finite(tau1) || !finite(tau2) ||
        !finite(kappa)) {
        return "parameters must be finite";
    }
    if (!(alpha > 0.0)) return "alpha must be > 0";
    if (!(beta < 0.0)) return "beta must be < 0";
    if (!(beta * beta < 8.0 * alpha * alpha)) return "beta^2 must be < 8 alpha^2";
    if (!(std::abs(beta) < std::abs(alpha))) return "|beta| must be < |alpha|";
    if (!(omega > 0.0)) return "omega must be > 0";
    if (tau1 < 0.0 || tau1 > 1.0) return "tau1 must lie in [0, 1]";
    if (tau2 < 0.0 || tau2 > 1.0) return "tau2 must lie in [0, 1]";
    if (kappa < 0.0) return "kappa must be >= 0";
    return std::nullopt;
}

ModelParams::ModelParams(double alpha, double beta, double omega, double tau1, double tau2,
                         double kappa)
    : alpha_(alpha), beta_(beta), omega_(omega), tau1_(tau1), tau2_(tau2), kappa_(kappa) {
    if (auto err = check(alpha, beta, omega, tau1, tau2, kappa)) {
        std::ostringstream os;
        os << "invalid model parameters (alpha=" << alpha << ", beta=" << beta
           << ", omega=" << omega << ", tau1=" << tau1 << ", tau2=" << tau2
           << ", kappa=" << kappa << "): " << *err;
        throw InvalidParameter(os.str());
    }
}

ModelParams ModelParams::reference(double tau1, double tau2, double kappa) {
    return {1.0, -0.1, 1.0, tau1, tau2, kappa};
}

std::string GroupElement::name() const {
    switch (kind_) {
        case Kind::Rotation: {
            std::ostringstream os;
            os << "rotation(" << angle_ << ")";
            return os.str();
        }
        case Kind::Gamma2:
            return "gamma2";
        case Kind::GammaPi:
            return "gammaPi";
    }
    return "?";
}

std::vector<Vec4d> sphere_samples(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vec4d> out;
    out.reserve(n);
    while (out.size() < n) {
        Vec4d v;
        for (int i = 0; i < 4; ++i) v(i) = normal(rng);
        const double nrm = v.norm();
        if (nrm < 1e-8) continue;
        out.push_back(v / nrm);
    }
    return out;
}

double equivariance_defect(const ModelParams& p, const GroupElement& g, std::size_t n_samples,
                           std::uint64_t seed) {
    if (n_samples < 1) throw InvalidParameter("n_samples must be >= 1");
    double worst = 0.0;
    for (const Vec4d& x : sphere_samples(n_samples, seed)) {
        const Vec4d lhs = eval_field_4d(p, g.apply(x));
        const Vec4d rhs = g.apply(eval_field_4d(p, x));
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

TangencyReport sphere_tangency_defect(const ModelParams& p, std::size_t n_samples,
                                      std::uint64_t seed) {
    if (n_samples < 1) throw InvalidParameter("n_samples must be >= 1");
    TangencyReport rep;
    rep.tangency_not_guaranteed = p.kappa() != 0.0;
    for (const Vec4d& x : sphere_samples(n_samples, seed)) {
        rep.max_defect = std::max(rep.max_defect, std::abs(eval_field_4d(p, x).dot(x)));
    }
    return rep;
}

DerivedConstants derived_constants(const ModelParams& p) {
    const double a = p.alpha();
    const double b = p.beta();
    DerivedConstants c{};
    c.C1 = c.C2 = a - b;
    c.E1 = c.E2 = a + b;
    c.delta1 = c.delta2 = (a - b) / (a + b);
    c.delta = c.delta1 * c.delta2;
    c.K = 2.0 * a / ((a + b) * (a + b));
    c.Komega = 2.0 * a * p.omega() / ((a + b) * (a + b));
    return c;
}

double h1_curve(double Komega) {
    if (!(Komega > 0.0)) throw DomainError("h1 requires Komega > 0");
    return 1.0 / std::sqrt(1.0 + Komega * Komega);
}

double h2_curve(double Komega) {
    if (!(Komega > 0.0)) throw DomainError("h2 requires Komega > 0");
    // Divided through by exp(6 pi / K) so small K does not overflow.
    const double e = std::exp(-6.0 * std::numbers::pi / Komega);
    return (1.0 - e) / (1.0 - e / 6.0);
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Torus:
            return "Torus";
        case Regime::Transition:
            return "Transition";
        case Regime::Horseshoe:
            return "Horseshoe";
    }
    return "?";
}

Regime predicted_regime(double Komega, double ratio) {
    if (!std::isfinite(ratio)) throw DomainError("regime ratio must be finite");
    if (ratio < h1_curve(Komega)) return Regime::Torus;
    if (ratio > h2_curve(Komega)) return Regime::Horseshoe;
    return Regime::Transition;
}

Regime predicted_regime(const ModelParams& p) {
    if (p.tau1() == 0.0) throw DomainError("regime ratio tau2/tau1 undefined for tau1 = 0");
    return predicted_regime(derived_constants(p).Komega, p.tau2() / p.tau1());
}

}  // namespace bykov
