#include "tw/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace tw {

namespace fs = std::filesystem;

std::string csv_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

constexpr const char* kVersion = "1.0.0";

// Tracks files created by a scenario so a failure leaves no partial output.
class Artifacts {
  public:
    explicit Artifacts(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        const fs::path p = dir_ / name;
        created_.push_back(p);
        std::ofstream out(p, std::ios::binary); // '\n' only, byte-stable
        if (!out) throw Error("cannot write " + p.string());
        return out;
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out = open(name);
        out << text;
    }

    void keep() { created_.clear(); }

    ~Artifacts() {
        for (const fs::path& p : created_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    fs::path dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<fs::path> created_;
};

std::vector<double> sweep_list(const RunConfig& cfg) {
    std::vector<double> gs;
    for (double g = 0.0; g <= cfg.sweep_gbar_max + 1e-12; g += cfg.sweep_gbar_step)
        gs.push_back(g);
    return gs;
}

void write_metadata(Artifacts& art, const RunConfig& cfg, double mu, double seconds) {
    std::ostringstream os;
    os << "version = " << kVersion << "\n";
    os << "scenario = " << to_string(cfg.scenario) << "\n";
    os << "resolved_mu = " << csv_num(mu) << "\n";
    os << "wall_time_s = " << csv_num(seconds) << "\n";
    os << "note = n_g(infinity) proxy in fig3b.csv is n_g(t_max)\n";
    art.write_text("metadata.txt", os.str());
}

double scenario_init_eq(const RunConfig& cfg, Artifacts& art) {
    const EquilibriumSolution eq = solve_equilibrium(cfg.params, cfg.params.gbar_before);
    std::ofstream out = art.open("equilibrium.csv");
    out << "mode,mu,omega,n,abs_u_p1,abs_u_0,abs_u_m1\n";
    const char* names[3] = {"g", "o", "e"};
    for (int l = 0; l < kModes; ++l) {
        out << names[l] << ',' << csv_num(eq.mu) << ',' << csv_num(eq.omega[l]) << ','
            << csv_num(eq.n0[l]);
        for (int x = 0; x < kModes; ++x) out << ',' << csv_num(std::abs(eq.frame(x, l)));
        out << '\n';
    }
    return eq.mu;
}

double scenario_sweep(const RunConfig& cfg, Artifacts& art) {
    const std::vector<SweepRow> rows = sweep_gbar(cfg.params, sweep_list(cfg), cfg.parallel);
    std::ofstream out = art.open("fig1.csv");
    out << "gbar,abs_u1g,omega_g,omega_o,omega_e,mu,status\n";
    double mu_last = 0.0;
    for (const SweepRow& r : rows) {
        if (r.converged) {
            out << csv_num(r.gbar) << ',' << csv_num(r.abs_u1g) << ','
                << csv_num(r.omega[0]) << ',' << csv_num(r.omega[1]) << ','
                << csv_num(r.omega[2]) << ',' << csv_num(r.mu) << ",ok\n";
            mu_last = r.mu;
        } else {
            out << csv_num(r.gbar) << ",,,,,,failed\n";
        }
    }
    return mu_last;
}

double scenario_quench(const RunConfig& cfg, Artifacts& art) {
    // an ablated evolution starts from the matching diagonal-only equilibrium
    EquilibriumOptions eopt;
    eopt.diag_only = cfg.evolution.zero_offdiag;
    const EquilibriumSolution eq =
        solve_equilibrium(cfg.params, cfg.params.gbar_before, eopt);
    const std::vector<TimeSeriesRecord> recs = run_quench(eq, cfg.params, cfg.evolution);

    {
        std::ofstream out = art.open("timeseries.csv");
        out << "tJ";
        const char* xs[3] = {"p1", "0", "m1"};
        const char* ls[3] = {"g", "o", "e"};
        for (int x = 0; x < 3; ++x)
            for (int l = 0; l < 3; ++l) out << ",abs_v_" << xs[x] << '_' << ls[l];
        for (int l = 0; l < 3; ++l) out << ",n_" << ls[l];
        for (int l = 0; l < 3; ++l) out << ",omega_" << ls[l];
        const char* ut[6] = {"gg", "go", "ge", "oo", "oe", "ee"};
        for (int k = 0; k < 6; ++k) out << ",re_dw_" << ut[k] << ",im_dw_" << ut[k];
        out << ",sc_iters\n";
        for (const TimeSeriesRecord& r : recs) {
            out << csv_num(r.t);
            for (int x = 0; x < 3; ++x)
                for (int l = 0; l < 3; ++l) out << ',' << csv_num(r.abs_v[x][l]);
            for (int l = 0; l < 3; ++l) out << ',' << csv_num(r.n[l]);
            for (int l = 0; l < 3; ++l) out << ',' << csv_num(r.omega[l]);
            for (int k = 0; k < 6; ++k)
                out << ',' << csv_num(r.dw[k].real()) << ',' << csv_num(r.dw[k].imag());
            out << ',' << r.sc_iters << '\n';
        }
    }
    {
        std::ofstream out = art.open("fig2.csv");
        out << "tJ,abs_v_p1_g,abs_v_m1_g\n";
        for (const TimeSeriesRecord& r : recs)
            out << csv_num(r.t) << ',' << csv_num(r.abs_v[0][0]) << ','
                << csv_num(r.abs_v[2][0]) << '\n';
    }
    {
        std::ofstream out = art.open("fig3a.csv");
        out << "tJ,n_g,n_o,n_e\n";
        for (const TimeSeriesRecord& r : recs)
            out << csv_num(r.t) << ',' << csv_num(r.n[0]) << ',' << csv_num(r.n[1]) << ','
                << csv_num(r.n[2]) << '\n';
    }
    {
        const double n_inf = recs.back().n[0];
        std::ofstream out = art.open("fig3b.csv");
        out << "tJ,abs_ng_minus_ng_tmax\n";
        for (const TimeSeriesRecord& r : recs)
            out << csv_num(r.t) << ',' << csv_num(std::abs(r.n[0] - n_inf)) << '\n';
    }
    return eq.mu;
}

double scenario_memory_check(const RunConfig& cfg, Artifacts& art) {
    const EquilibriumSolution eq = solve_equilibrium(cfg.params, cfg.params.gbar_before);
    ModelParams p = cfg.params;
    p.mu = eq.mu;
    SystemState s = initial_state(eq, p, p.gbar_after);
    // Displace the occupations so both transport brackets are O(1); the
    // counter-term entries do not depend on n.
    s.n[kG] += 2.0;
    s.n[kE] += 1.0;

    const std::vector<double> epsilons{0.04, 0.02, 0.01, 0.005};
    const MemoryCheckReport rep =
        memory_check_report(s, p, p.gbar_after, epsilons, cfg.mc_k_points);

    std::ofstream out = art.open("memorycheck.csv");
    out << "source";
    const char* ut[6] = {"gg", "go", "ge", "oo", "oe", "ee"};
    for (int k = 0; k < 6; ++k) out << ",re_dw_" << ut[k] << ",im_dw_" << ut[k];
    out << ",ndot_g,ndot_o,ndot_e\n";
    auto row = [&](const std::string& name, const HermitianView& d, const Vec3& nd) {
        out << name;
        for (int a = 0; a < kModes; ++a)
            for (int b = a; b < kModes; ++b)
                out << ',' << csv_num(d(a, b).real()) << ',' << csv_num(d(a, b).imag());
        for (int l = 0; l < kModes; ++l) out << ',' << csv_num(nd[l]);
        out << '\n';
    };
    for (size_t i = 0; i < epsilons.size(); ++i)
        row("eps=" + csv_num(epsilons[i]), rep.per_epsilon[i].delta_omega_nm,
            rep.per_epsilon[i].n_dot_nm);
    row("extrapolated", rep.extrapolated.delta_omega_nm, rep.extrapolated.n_dot_nm);
    row("markovian", rep.delta_omega_markov, rep.n_dot_markov);
    out << "max_rel_err_delta," << csv_num(rep.max_rel_err_delta) << '\n';
    out << "max_rel_err_ndot," << csv_num(rep.max_rel_err_ndot) << '\n';
    return eq.mu;
}

struct ValidationLine {
    std::string name;
    bool pass;
    std::string detail;
};

double scenario_validate(const RunConfig& cfg, Artifacts& art, bool& all_pass) {
    std::vector<ValidationLine> lines;
    auto check = [&](const std::string& name, bool ok, double value) {
        lines.push_back({name, ok, csv_num(value)});
    };

    const EquilibriumSolution eq = solve_equilibrium(cfg.params, cfg.params.gbar_before);
    check("equilibrium fixed-point residual <= 1e-10", eq.residual <= 1e-10, eq.residual);

    double nsum = 0.0;
    for (int l = 0; l < kModes; ++l) nsum += eq.n0[l];
    check("|sum n - N_total| <= 1e-8", std::abs(nsum - cfg.params.n_total) <= 1e-8,
          std::abs(nsum - cfg.params.n_total));

    // odd column equals (1,0,-1)/sqrt(2) up to phase
    const double isq2 = 1.0 / std::sqrt(2.0);
    double odd_dev = std::abs(std::abs(eq.frame(0, kO)) - isq2);
    odd_dev = std::max(odd_dev, std::abs(eq.frame(1, kO)));
    odd_dev = std::max(odd_dev, std::abs(eq.frame(2, kO) + eq.frame(0, kO)));
    check("odd eigenvector parity deviation <= 1e-12", odd_dev <= 1e-12, odd_dev);

    // re-applying the self-consistency map reproduces the solution
    {
        ModelParams p = cfg.params;
        p.mu = eq.mu;
        const HermitianView d =
            counterterm_markovian(overlaps(eq.frame), eq.omega, p, p.gbar_before);
        const HermitianView dx = delta_omega_to_site_basis(d, eq.frame);
        const EigResult e =
            eig_hermitian_nondegenerate(HermitianView(build_h0(p).matrix() + dx.matrix()));
        double dev = (d.matrix() - eq.delta_omega_ell.matrix()).max_abs();
        for (int l = 0; l < kModes; ++l)
            dev = std::max(dev, std::abs(e.eigenvalues[l] - eq.omega[l]));
        check("fixed-point reapplication deviation <= 1e-9", dev <= 1e-9, dev);
    }

    // counter-term structure: exact hermiticity and vanishing odd row
    {
        ModelParams p = cfg.params;
        p.mu = eq.mu;
        const HermitianView d =
            counterterm_markovian(overlaps(eq.frame), eq.omega, p, p.gbar_before);
        double odd = 0.0;
        for (int l = 0; l < kModes; ++l)
            odd = std::max({odd, std::abs(d(kO, l)), std::abs(d(l, kO))});
        check("counter-term odd-mode entries <= 1e-15", odd <= 1e-15, odd);
        check("counter-term hermiticity defect == 0", hermiticity_defect(d.matrix()) == 0.0,
              hermiticity_defect(d.matrix()));
    }

    // short no-quench stationarity
    {
        ModelParams p = cfg.params;
        p.mu = eq.mu;
        p.gbar_after = p.gbar_before;
        EvolutionConfig ev = cfg.evolution;
        ev.t_max = 5.0;
        ev.output_stride = 50;
        double drift = 0.0;
        const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, ev);
        for (const TimeSeriesRecord& r : recs) {
            for (int x = 0; x < 3; ++x)
                for (int l = 0; l < 3; ++l)
                    drift = std::max(drift,
             std::abs(r.abs_v[x][l] - recs.front().abs_v[x][l]));
            for (int l = 0; l < 3; ++l)
                drift = std::max({drift, std::abs(r.n[l] - recs.front().n[l]),
                                  std::abs(r.omega[l] - recs.front().omega[l])});
        }
        check("no-quench stationarity over 5/J <= 1e-8", drift <= 1e-8, drift);
    }

    // unitarity and odd-mode invariance along a short quench
    {
        ModelParams p = cfg.params;
        p.mu = eq.mu;
        EvolutionConfig ev = cfg.evolution;
        ev.t_max = 2.0;
        ev.output_stride = 1;
        double udef = 0.0, odd = 0.0;
        run_quench(eq, p, ev, [&](const SystemState& s, int) {
            udef = std::max(udef, unitarity_defect(s.frame.matrix()));
            odd = std::max({odd, std::abs(std::abs(s.frame(0, kO)) - isq2),
                            std::abs(s.frame(1, kO)),
                            std::abs(s.frame(2, kO) + s.frame(0, kO))});
        });
        check("unitarity defect along quench <= 1e-10", udef <= 1e-10, udef);
        check("odd-column invariance along quench <= 1e-10", odd <= 1e-10, odd);
    }

    // transport drives n toward the Bose-Einstein value
    {
        ModelParams p = cfg.params;
        p.mu = eq.mu;
        bool ok = true;
        const Overlaps ov = overlaps(eq.frame);
        for (double shift : {-0.5, -0.1, 0.1, 0.5, 2.0}) {
            Vec3 n = eq.n0;
            for (int l = 0; l < kModes; ++l) n[l] = std::max(0.0, n[l] + shift);
            const Vec3 rhs = transport_rhs(n, ov, eq.omega, p, p.gbar_before);
            for (int l : {kG, kE}) {
                const double want = bose_einstein(p.beta, eq.omega[l]) - n[l];
                if (want != 0.0 && rhs[l] * want < 0.0) ok = false;
            }
        }
        check("transport sign property", ok, ok ? 1.0 : 0.0);
    }

    all_pass = true;
    std::ostringstream os;
    for (const ValidationLine& l : lines) {
        os << (l.pass ? "PASS" : "FAIL") << "  " << l.name << "  [" << l.detail << "]\n";
        all_pass = all_pass && l.pass;
    }
    art.write_text("validate.txt", os.str());
    return eq.mu;
}

} // namespace

void emit_plot_scripts(const std::string& output_dir, double t_max) {
    const fs::path dir(output_dir);
    bool any = false;

    auto script = [&](const char* csv, const char* gp, const std::string& body) {
        if (!fs::exists(dir / csv)) return;
        std::ofstream out(dir / gp, std::ios::binary);
        out << "set datafile separator ','\nset key autotitle columnhead\n" << body;
        any = true;
    };

    script("fig1.csv", "fig1.gp",
           "set xlabel 'gbar/J'\nset ylabel '|u_{+-1 g}|'\n"
           "set xrange [0:0.3]\nset yrange [0.4994:0.5]\n"
           "plot 'fig1.csv' using 1:2 with linespoints\n");
    {
        std::ostringstream b;
        b << "set xlabel 'tJ'\nset ylabel '|v_{+-1 g}(t)|'\n"
          << "set xrange [0:" << csv_num(t_max) << "]\nset yrange [0.498:0.502]\n"
          << "plot 'fig2.csv' using 1:2 with lines, 'fig2.csv' using 1:3 with lines\n";
        script("fig2.csv", "fig2.gp", b.str());
    }
    {
        std::ostringstream b;
        b << "set xlabel 'tJ'\nset ylabel 'n_l(t)'\n"
          << "set xrange [0:" << csv_num(t_max) << "]\n"
          << "plot 'fig3a.csv' using 1:2 with lines, 'fig3a.csv' using 1:3 with lines, "
             "'fig3a.csv' using 1:4 with lines\n";
        script("fig3a.csv", "fig3a.gp", b.str());
    }
    script("fig3b.csv", "fig3b.gp",
           "set xlabel 'tJ'\nset ylabel '|n_g(t) - n_g(infinity)|'\n"
           "set logscale y\nset xrange [0:100]\nset yrange [1e-4:1e0]\n"
           "plot 'fig3b.csv' using 1:2 with lines\n");

    if (!any)
        throw ConfigError("emit_plot_scripts: no figure CSV found in '" + output_dir +
                          "' (expected fig1.csv, fig2.csv, fig3a.csv or fig3b.csv)");
}

bool run_scenario(const RunConfig& cfg) {
    if (cfg.scenario == Scenario::Unset) throw ConfigError("no scenario selected");
    cfg.params.validate();

    const auto t0 = std::chrono::steady_clock::now();
    Artifacts art(cfg.output_dir);
    art.write_text("config.resolved", render_config(cfg));

    double mu = 0.0;
    bool all_pass = true;
    switch (cfg.scenario) {
        case Scenario::InitEq:
            mu = scenario_init_eq(cfg, art);
            break;
        case Scenario::SweepG:
            mu = scenario_sweep(cfg, art);
            emit_plot_scripts(cfg.output_dir, cfg.evolution.t_max);
            break;
        case Scenario::Quench:
            mu = scenario_quench(cfg, art);
            emit_plot_scripts(cfg.output_dir, cfg.evolution.t_max);
            break;
        case Scenario::Validate:
            mu = scenario_validate(cfg, art, all_pass);
            break;
        case Scenario::MemoryCheck:
            mu = scenario_memory_check(cfg, art);
            break;
        case Scenario::Unset:
            break;
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(art, cfg, mu, seconds);
    art.keep();
    return all_pass;
}

} // namespace tw
