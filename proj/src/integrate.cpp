#include "bykov/integrate.hpp"

#include <cstdio>
#include <ostream>

namespace bykov {

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0)) throw InvalidParameter("rtol must be > 0");
    if (!(atol > 0.0)) throw InvalidParameter("atol must be > 0");
    if (!(max_step > 0.0)) throw InvalidParameter("max_step must be > 0");
    if (!(sample_dt > 0.0)) throw InvalidParameter("sample_dt must be > 0");
    if (!(t_transient >= 0.0)) throw InvalidParameter("t_transient must be >= 0");
}

Trajectory<4> integrate(const ModelParams& p, const Vec4d& x0, double t_end,
                        const IntegratorConfig& cfg) {
    auto traj = integrate_field<4>([&p](const Vec4d& x) { return eval_field_4d(p, x); }, x0,
                                   t_end, cfg);
    traj.params = p;
    return traj;
}

Trajectory<3> integrate(const ModelParams& p, const Vec3d& y0, double t_end,
                        const IntegratorConfig& cfg) {
    // Fails fast with QuotientInvalid before any stepping.
    (void)eval_field_3d(p, y0);
    auto traj = integrate_field<3>([&p](const Vec3d& y) { return eval_field_3d(p, y); }, y0,
                                   t_end, cfg);
    traj.params = p;
    return traj;
}

Trajectory<2> integrate(const ModelParams& p, const Vec2d& z0, double t_end,
                        const IntegratorConfig& cfg) {
    auto traj = integrate_field<2>([&p](const Vec2d& z) { return eval_field_2d(p, z); }, z0,
                                   t_end, cfg);
    traj.params = p;
    return traj;
}

std::string trajectory_header(int dim) {
    switch (dim) {
        case 4:
            return "t,x1,x2,x3,x4";
        case 3:
            return "t,rho,x3,x4";
        case 2:
            return "t,x3,x4";
        default:
            throw InvalidParameter("unsupported trajectory dimension");
    }
}

void write_csv_row(std::ostream& os, double t, const double* x, int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << buf;
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", x[i]);
        os << ',' << buf;
    }
    os << '\n';
}

template <int N>
void write_trajectory_csv(std::ostream& os, const Trajectory<N>& traj) {
    os << trajectory_header(N) << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        write_csv_row(os, traj.times[i], traj.states[i].data(), N);
    }
}

template void write_trajectory_csv<4>(std::ostream&, const Trajectory<4>&);
template void write_trajectory_csv<3>(std::ostream&, const Trajectory<3>&);
template void write_trajectory_csv<2>(std::ostream&, const Trajectory<2>&);

SectionSpec default_section() {
    SectionSpec s;
    s.normal = Vec4d(0.0, 1.0, 0.0, 0.0);
    s.offset = 0.0;
    s.direction = Direction::Increasing;
    s.half_space = Vec4d(1.0, 0.0, 0.0, 0.0);
    return s;
}

std::vector<Crossing<4>> detect_crossings(const ModelParams& p, const Vec4d& x0, double t_end,
                                          const IntegratorConfig& cfg, const SectionSpec& s,
                                          double refine_tol, double t_from) {
    return detect_crossings<4>([&p](const Vec4d& x) { return eval_field_4d(p, x); }, x0, t_end,
                               cfg, s, refine_tol, t_from);
}

}  // namespace bykov
