#include "bykov/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "bykov/config.hpp"
#include "bykov/geometry.hpp"
#include "bykov/integrate.hpp"
#include "bykov/lyapunov.hpp"
#include "bykov/model.hpp"
#include "bykov/sweep.hpp"
#include "bykov/validate.hpp"

namespace bykov::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

/// Flags that map one-to-one onto config keys; values given on the command
/// line are applied after the config file.
class KeyedFlags {
public:
    void add(CLI::App* sub, const std::string& flag, const std::string& key,
             const std::string& desc) {
        auto& slot = values_[sub][key];
        flags_[sub].push_back({sub->add_option(flag, slot, desc), key});
    }

    void add_bool(CLI::App* sub, const std::string& flag, const std::string& key,
                  const std::string& desc) {
        auto& slot = bools_[sub][key];
        auto* opt = sub->add_flag(flag, slot, desc);
        bool_flags_[sub].push_back({opt, key});
    }

    ConfigEntries given(CLI::App* sub) {
        ConfigEntries out;
        for (const auto& [opt, key] : flags_[sub]) {
            if (opt->count() > 0 || !opt->empty()) out.emplace_back(key, values_[sub][key]);
        }
        for (const auto& [opt, key] : bool_flags_[sub]) {
            if (opt->count() > 0) out.emplace_back(key, bools_[sub][key] ? "true" : "false");
        }
        return out;
    }

private:
    std::map<CLI::App*, std::map<std::string, std::string>> values_;
    std::map<CLI::App*, std::map<std::string, bool>> bools_;
    std::map<CLI::App*, std::vector<std::pair<CLI::Option*, std::string>>> flags_;
    std::map<CLI::App*, std::vector<std::pair<CLI::Option*, std::string>>> bool_flags_;
};

void add_model_flags(KeyedFlags& kf, CLI::App* sub, bool taus = true) {
    const RunConfig d;
    kf.add(sub, "--alpha", "model.alpha", "alpha > 0 (default " + short_fmt(d.alpha) + ")");
    kf.add(sub, "--beta", "model.beta",
           "beta < 0 with |beta| < alpha (default " + short_fmt(d.beta) + ")");
    kf.add(sub, "--omega", "model.omega", "omega > 0 (default " + short_fmt(d.omega) + ")");
    if (taus) {
        kf.add(sub, "--tau1", "model.tau1", "tau1 in [0,1] (default 0)");
        kf.add(sub, "--tau2", "model.tau2", "tau2 in [0,1] (default 0)");
        kf.add(sub, "--kappa", "model.kappa",
               "amplitude of the all-symmetry-breaking term (default 0)");
    }
}

void add_integrator_flags(KeyedFlags& kf, CLI::App* sub) {
    const IntegratorConfig d;
    kf.add(sub, "--rtol", "integrator.rtol", "relative tolerance (default " + short_fmt(d.rtol) + ")");
    kf.add(sub, "--atol", "integrator.atol", "absolute tolerance (default " + short_fmt(d.atol) + ")");
    kf.add(sub, "--max-step", "integrator.max_step",
           "largest step size (default " + short_fmt(d.max_step) + ")");
    kf.add(sub, "--t-transient", "integrator.t_transient",
           "transient discarded where applicable (default " + short_fmt(d.t_transient) + ")");
    kf.add(sub, "--sample-dt", "integrator.sample_dt",
           "output sample interval (default " + short_fmt(d.sample_dt) + ")");
    kf.add_bool(sub, "--project", "integrator.project_to_sphere",
                "renormalize onto the unit sphere after every step (default off)");
}

void add_lyapunov_flags(KeyedFlags& kf, CLI::App* sub) {
    const LyapunovSettings d;
    kf.add(sub, "--T", "lyapunov.T",
           "total time including the transient (default " + short_fmt(d.T) + ")");
    kf.add(sub, "--gs-interval", "lyapunov.gs_interval",
           "reorthonormalization interval (default " + short_fmt(d.gs_interval) + ")");
    kf.add(sub, "--zero-tol", "lyapunov.zero_tol",
           "|lambda| <= zero-tol counts as zero (default " + short_fmt(d.zero_tol) + ")");
    kf.add(sub, "--convergence-tol", "lyapunov.convergence_tol",
           "max tail variation for convergence (default " + short_fmt(d.convergence_tol) + ")");
}

void add_sweep_flags(KeyedFlags& kf, CLI::App* sub) {
    const SweepSpec d;
    kf.add(sub, "--tau1-lo", "sweep.tau1_lo", "default " + short_fmt(d.tau1_lo));
    kf.add(sub, "--tau1-hi", "sweep.tau1_hi", "default " + short_fmt(d.tau1_hi));
    kf.add(sub, "--n1", "sweep.n1", "grid points along tau1 (default " + std::to_string(d.n1) + ")");
    kf.add(sub, "--tau2-lo", "sweep.tau2_lo", "default " + short_fmt(d.tau2_lo));
    kf.add(sub, "--tau2-hi", "sweep.tau2_hi", "default " + short_fmt(d.tau2_hi));
    kf.add(sub, "--n2", "sweep.n2", "grid points along tau2 (default " + std::to_string(d.n2) + ")");
    kf.add(sub, "--ic", "sweep.x0", "initial condition x1,x2,x3,x4 (default 0.1,0.1,0,-0.99)");
    kf.add(sub, "--workers", "sweep.workers",
           "worker threads (default $BYKOV_LAB_THREADS, else 1)");
}

/// Writes to the named file, or to `fallback` for "" and "-".
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw Error("cannot open " + path + " for writing");
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

std::vector<std::string> validation_errors(const RunConfig& c, bool lyapunov, bool sweep) {
    std::vector<std::string> errs;
    auto attempt = [&errs](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            errs.emplace_back(e.what());
        }
    };
    if (!sweep) attempt([&] { (void)c.params(); });
    attempt([&] { c.integrator.validate(); });
    if (lyapunov) attempt([&] { c.lyapunov.validate(c.integrator); });
    if (sweep) {
        attempt([&] { c.sweep.validate(); });
        if (c.workers < 1) errs.emplace_back("workers must be >= 1");
    }
    return errs;
}

Vec4d to_vec4(const std::string& s) {
    const auto v = parse_vector(s, 4);
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and analysis of the two-parameter equivariant field on S^3",
                 "bykov_lab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path,
                   "config file with [model] [integrator] [lyapunov] [sweep] sections; "
                   "flags override its values");

    KeyedFlags kf;

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory and write it as CSV");
    add_model_flags(kf, sim);
    add_integrator_flags(kf, sim);
    std::string sim_ic = "0.1,0.1,0,-0.99", sim_out, sim_system = "4d";
    double sim_t_end = 10000.0;
    sim->add_option("--ic", sim_ic, "initial condition (4 values; 3 for --system 3d)")
        ->capture_default_str();
    sim->add_option("--t-end", sim_t_end, "final time")->capture_default_str();
    sim->add_option("--system", sim_system, "4d (full system) or 3d (SO(2) quotient, tau2 = 0)")
        ->check(CLI::IsMember({"4d", "3d"}))
        ->capture_default_str();
    sim->add_option("--out", sim_out, "output CSV (default stdout)");

    // poincare
    auto* poi = app.add_subcommand("poincare", "section portrait (t,x3,x4) of the 4D flow");
    add_model_flags(kf, poi);
    add_integrator_flags(kf, poi);
    std::string poi_ic = "0.1,0.1,0,-0.99", poi_out, poi_normal = "0,1,0,0",
                poi_half = "1,0,0,0", poi_dir = "increasing";
    double poi_t_end = 10000.0, poi_offset = 0.0, poi_refine = 1e-12;
    std::optional<double> poi_t_from;
    poi->add_option("--ic", poi_ic, "initial condition")->capture_default_str();
    poi->add_option("--t-end", poi_t_end, "final time")->capture_default_str();
    poi->add_option("--t-from", poi_t_from, "first time at which hits are kept (default t-transient)");
    poi->add_option("--normal", poi_normal, "section normal n (n.x = offset)")->capture_default_str();
    poi->add_option("--offset", poi_offset, "section offset")->capture_default_str();
    poi->add_option("--direction", poi_dir, "increasing, decreasing or both")
        ->check(CLI::IsMember({"increasing", "decreasing", "both"}))
        ->capture_default_str();
    poi->add_option("--half-space", poi_half, "keep hits with h.x > 0, or 'none'")
        ->capture_default_str();
    poi->add_option("--refine-tol", poi_refine, "bisection tolerance on |n.x - offset|")
        ->capture_default_str();
    poi->add_option("--out", poi_out, "output CSV (default stdout)");

    // lyapunov
    auto* lya = app.add_subcommand("lyapunov", "Lyapunov spectrum and class at one parameter point");
    add_model_flags(kf, lya);
    add_integrator_flags(kf, lya);
    add_lyapunov_flags(kf, lya);
    std::string lya_ic = "0.1,0.1,0,-0.99", lya_out;
    bool lya_allow = false;
    lya->add_option("--ic", lya_ic, "initial condition")->capture_default_str();
    lya->add_flag("--allow-unconverged", lya_allow, "classify even if the spectrum did not converge");
    lya->add_option("--out", lya_out, "output CSV (default stdout)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "classify a (tau1, tau2) grid by Lyapunov spectrum");
    add_model_flags(kf, swp, false);
    kf.add(swp, "--kappa", "model.kappa", "amplitude of the all-symmetry-breaking term (default 0)");
    add_integrator_flags(kf, swp);
    add_lyapunov_flags(kf, swp);
    add_sweep_flags(kf, swp);
    std::string swp_out, swp_resume, swp_image;
    bool swp_quiet = false;
    swp->add_option("--out", swp_out, "sweep CSV; rows stream to <out>.part while running")
        ->required();
    swp->add_option("--resume", swp_resume, "skip cells already present in this CSV");
    swp->add_option("--image", swp_image, "also write the PPM image here");
    swp->add_flag("--quiet", swp_quiet, "suppress 'done i j class' progress lines");

    // render
    auto* ren = app.add_subcommand("render", "render a sweep CSV as a binary PPM image");
    std::string ren_csv, ren_out;
    ren->add_option("--csv", ren_csv, "sweep CSV")->required();
    ren->add_option("--out", ren_out, "output PPM")->required();

    // reduce2d
    auto* red = app.add_subcommand("reduce2d", "planar reduced system: trajectory and limit cycle");
    add_model_flags(kf, red);
    add_integrator_flags(kf, red);
    std::string red_ic = "0,-0.99", red_out;
    double red_t_end = 10000.0, red_t_search = 5000.0;
    bool red_cycle = false;
    red->add_option("--ic", red_ic, "initial condition x3,x4")->capture_default_str();
    red->add_option("--t-end", red_t_end, "final time of the written trajectory")
        ->capture_default_str();
    red->add_option("--out", red_out, "trajectory CSV (t,x3,x4)");
    red->add_flag("--find-cycle", red_cycle,
                  "locate the stable cycle through {x3 = 0, x3' > 0} (transient 200, match 1e-8)");
    red->add_option("--t-search", red_t_search, "time budget for the cycle search")
        ->capture_default_str();

    // validate
    auto* val = app.add_subcommand("validate", "run the machine-precision invariant suite");
    add_model_flags(kf, val, false);
    std::uint64_t val_seed = 7;
    std::size_t val_samples = 10000;
    val->add_option("--seed", val_seed, "sampling seed")->capture_default_str();
    val->add_option("--samples", val_samples, "points per tangency check")->capture_default_str();

    // curves
    auto* cur = app.add_subcommand("curves", "derived constants and the h1/h2 regime curves");
    add_model_flags(kf, cur, false);
    std::optional<double> cur_kmin, cur_kmax;
    int cur_count = 0;
    cur->add_option("--komega-min", cur_kmin, "tabulate h1/h2 from this Komega");
    cur->add_option("--komega-max", cur_kmax, "to this Komega");
    cur->add_option("--count", cur_count, "number of log-spaced rows (needs min/max)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        CLI::App* shown = &app;
        for (auto* sub : app.get_subcommands()) shown = sub;
        err << shown->help();
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (const char* env = std::getenv("BYKOV_LAB_THREADS")) {
        try {
            apply_config(cfg, {{"sweep.workers", env}});
        } catch (const Error& e) {
            err << "error: BYKOV_LAB_THREADS: " << e.what() << '\n';
            return 2;
        }
    }
    try {
        if (!config_path.empty()) apply_config(cfg, parse_config_file(config_path));
        apply_config(cfg, kf.given(sub));
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    cfg.sweep.alpha = cfg.alpha;
    cfg.sweep.beta = cfg.beta;
    cfg.sweep.omega = cfg.omega;
    cfg.sweep.kappa = cfg.kappa;
    cfg.sweep.integrator = cfg.integrator;
    cfg.sweep.lyapunov = cfg.lyapunov;

    const bool needs_lyap = sub == lya || sub == swp;
    const auto errs =
        (sub == ren) ? std::vector<std::string>{} : validation_errors(cfg, needs_lyap, sub == swp);
    if (!errs.empty()) {
        for (const auto& e : errs) err << "error: " << e << '\n';
        return 1;
    }

    try {
        if (sub == sim) {
            Output o(sim_out, out);
            auto& os = o.stream();
            const ModelParams p = cfg.params();
            if (sim_system == "4d") {
                const Vec4d x0 = to_vec4(sim_ic);
                os << trajectory_header(4) << '\n';
                integrate_field<4>([&p](const Vec4d& x) { return eval_field_4d(p, x); }, x0,
                                   sim_t_end, cfg.integrator, [&os](double t, const Vec4d& x) {
                                       write_csv_row(os, t, x.data(), 4);
                                   });
            } else {
                const auto v = parse_vector(sim_ic);
                Vec3d y0;
                if (v.size() == 4) {
                    y0 = to_quotient(Vec4d(v[0], v[1], v[2], v[3]));
                } else if (v.size() == 3) {
                    y0 = Vec3d(v[0], v[1], v[2]);
                } else {
                    throw ParseError("--ic needs 3 or 4 values for --system 3d", 0);
                }
                (void)eval_field_3d(p, y0);
                cfg.integrator.project_to_sphere = false;
                os << trajectory_header(3) << '\n';
                integrate_field<3>([&p](const Vec3d& y) { return eval_field_3d(p, y); }, y0,
                                   sim_t_end, cfg.integrator, [&os](double t, const Vec3d& y) {
                                       write_csv_row(os, t, y.data(), 3);
                                   });
            }
            return 0;
        }

        if (sub == poi) {
            SectionSpec s;
            s.normal = to_vec4(poi_normal);
            s.offset = poi_offset;
            s.direction = poi_dir == "increasing"   ? Direction::Increasing
                          : poi_dir == "decreasing" ? Direction::Decreasing
                                                    : Direction::Both;
            if (poi_half != "none") s.half_space = to_vec4(poi_half);
            const double t_from = poi_t_from.value_or(cfg.integrator.t_transient);
            const auto hits = section_portrait(cfg.params(), to_vec4(poi_ic), poi_t_end, s,
                                               cfg.integrator, t_from, poi_refine);
            Output o(poi_out, out);
            write_portrait_csv(o.stream(), hits);
            if (hits.size() >= 10) {
                const auto rot = rotation_number(ReturnSeries::from_hits(hits));
                err << "hits " << hits.size() << ", rotation number " << fmt(rot.estimate)
                    << " +- " << fmt(rot.std_error) << '\n';
            } else {
                err << "hits " << hits.size() << '\n';
            }
            return 0;
        }

        if (sub == lya) {
            const ModelParams p = cfg.params();
            const SpectrumResult r = spectrum(p, to_vec4(lya_ic), cfg.lyapunov, cfg.integrator);
            err << "converged " << (r.converged ? "yes" : "no") << ", tail variation "
                << fmt(r.tail_variation) << '\n';
            if (!r.converged && !lya_allow) {
                err << "error: spectrum did not converge (use --allow-unconverged to classify)\n";
                return 1;
            }
            const AttractorClass c = classify(r, cfg.lyapunov.zero_tol, true);
            err << "class " << to_string(c.label)
                << (c.positive_lambda1 ? " (lambda1 > 3 zero_tol: chaos likely)" : "") << '\n';
            Output o(lya_out, out);
            o.stream() << spectrum_csv_header() << '\n'
                       << spectrum_csv_row(p.tau1(), p.tau2(), r, c) << '\n';
            return 0;
        }

        if (sub == swp) {
            const std::filesystem::path out_path(swp_out);
            const std::filesystem::path part = out_path.string() + ".part";
            std::optional<std::filesystem::path> resume;
            if (!swp_resume.empty()) resume = swp_resume;
            if (!resume && std::filesystem::exists(part)) {
                std::filesystem::remove(part);
            }
            if (resume && std::filesystem::absolute(*resume) != std::filesystem::absolute(part) &&
                std::filesystem::exists(part)) {
                std::filesystem::remove(part);
            }
            SweepOptions opt;
            opt.checkpoint = part;
            if (!swp_quiet) {
                opt.progress = [&err](int i, int j, const SweepCell& c) {
                    err << "done " << i << ' ' << j << ' ' << to_string(c.cls) << '\n';
                };
            }
            const SweepGrid grid = run_sweep(cfg.sweep, cfg.workers, resume, opt);
            grid_to_csv(grid, out_path);
            std::filesystem::remove(part);
            if (!swp_image.empty()) render_grid(grid, std::filesystem::path(swp_image));
            return 0;
        }

        if (sub == ren) {
            render_grid(csv_to_grid(std::filesystem::path(ren_csv)), std::filesystem::path(ren_out));
            return 0;
        }

        if (sub == red) {
            const ModelParams p = cfg.params();
            const auto v = parse_vector(red_ic, 2);
            const Vec2d z0(v[0], v[1]);
            cfg.integrator.project_to_sphere = false;
            if (!red_out.empty() || !red_cycle) {
                Output o(red_out, out);
                auto& os = o.stream();
                os << trajectory_header(2) << '\n';
                integrate_field<2>([&p](const Vec2d& z) { return eval_field_2d(p, z); }, z0,
                                   red_t_end, cfg.integrator, [&os](double t, const Vec2d& z) {
                                       write_csv_row(os, t, z.data(), 2);
                                   });
            }
            if (red_cycle) {
                try {
                    const LimitCycle2D lc = find_limit_cycle_2d(p, z0, red_t_search, cfg.integrator);
                    out << "tau1,period,section_x3,section_x4,floquet\n"
                        << fmt(p.tau1()) << ',' << fmt(lc.period) << ','
                        << fmt(lc.section_point(0)) << ',' << fmt(lc.section_point(1)) << ','
                        << fmt(lc.floquet_estimate) << '\n';
                } catch (const NoCycleFound& e) {
                    err << "no cycle: " << e.what() << '\n';
                    return 1;
                }
            }
            return 0;
        }

        if (sub == val) {
            const auto checks = run_invariant_suite(cfg.alpha, cfg.beta, cfg.omega, val_seed,
                                                    std::max<std::size_t>(val_samples, 100));
            print_check_table(out, checks);
            for (const auto& c : checks) {
                if (!c.passed()) return 1;
            }
            return 0;
        }

        if (sub == cur) {
            const DerivedConstants c = derived_constants(cfg.params());
            if (cur_count > 0 || cur_kmin || cur_kmax) {
                if (!cur_kmin || !cur_kmax || cur_count < 2 || !(*cur_kmin > 0.0) ||
                    !(*cur_kmax > *cur_kmin)) {
                    err << "error: --komega-min < --komega-max (both > 0) and --count >= 2 are "
                           "required together\n";
                    return 2;
                }
                out << "Komega,h1,h2\n";
                for (int k = 0; k < cur_count; ++k) {
                    const double K = *cur_kmin * std::pow(*cur_kmax / *cur_kmin,
                                                          static_cast<double>(k) / (cur_count - 1));
                    out << fmt(K) << ',' << fmt(h1_curve(K)) << ',' << fmt(h2_curve(K)) << '\n';
                }
                return 0;
            }
            out << "alpha,beta,omega,C,E,delta1,delta,K,Komega,h1,h2\n"
                << fmt(cfg.alpha) << ',' << fmt(cfg.beta) << ',' << fmt(cfg.omega) << ','
                << fmt(c.C1) << ',' << fmt(c.E1) << ',' << fmt(c.delta1) << ','
                << fmt(c.delta) << ',' << fmt(c.K) << ',' << fmt(c.Komega) << ','
                << fmt(h1_curve(c.Komega)) << ',' << fmt(h2_curve(c.Komega)) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace bykov::cli
