#include "gyrodrift/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gyrodrift/field_io.hpp"

namespace gyrodrift {

const char* const kDiagnosticsHeader =
    "t,mass,kinetic_energy,potential_energy,entropy,free_energy,dissipation,"
    "rel_entropy_v,modulated_energy,l1_dist,ck_bound,clipped_mass,mass_drift";

namespace {

std::string g17(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string tag4(int k) {
    char b[16];
    std::snprintf(b, sizeof b, "%04d", k);
    return b;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

KineticRunConfig kinetic_config(const RunConfig& c) {
    KineticRunConfig k;
    k.params = c.params;
    k.L = c.L;
    k.Nx = c.Nx;
    k.v_max = c.v_max;
    k.Nv = c.Nv;
    k.magnetic = c.magnetic;
    k.init = c.init;
    k.background_width = c.background_width;
    k.dt_max = c.dt_max;
    k.snapshots = c.snapshots;
    return k;
}

LimitRunConfig limit_config(const RunConfig& c) {
    LimitRunConfig l;
    l.params = c.params;
    l.L = c.L;
    l.Nx = c.Nx;
    l.magnetic = c.magnetic;
    l.init = c.init;
    l.background_width = c.background_width;
    l.dt_max = c.dt_max;
    l.snapshots = c.snapshots;
    return l;
}

void write_comparison_csv(const std::vector<CompareRow>& rows, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,l1_phase,l1_density,field_l2,modulated_energy,ck_bound\n";
    for (const CompareRow& r : rows)
        out << g17(r.t) << ',' << g17(r.l1_phase) << ',' << g17(r.l1_density) << ','
            << g17(r.field_l2) << ',' << g17(r.modulated) << ',' << g17(r.ck_bound)
            << '\n';
    if (!out) throw IoError("write failed on " + path);
}

} // namespace

OutputLock::OutputLock(const std::string& dir) : path_(dir + "/lock") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
        throw IoError("output directory " + dir + " is locked; remove " + path_ +
                      " if no run is active");
    std::fclose(f);
}

OutputLock::~OutputLock() { std::remove(path_.c_str()); }

void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& rows,
                           const std::string& path) {
    std::ofstream out = open_out(path);
    out << kDiagnosticsHeader << '\n';
    for (const DiagnosticsRecord& r : rows)
        out << g17(r.t) << ',' << g17(r.mass) << ',' << g17(r.kinetic_energy) << ','
            << g17(r.potential_energy) << ',' << g17(r.entropy) << ','
            << g17(r.free_energy) << ',' << g17(r.dissipation) << ','
            << g17(r.rel_entropy_v) << ',' << g17(r.modulated_energy) << ','
            << g17(r.l1_dist) << ',' << g17(r.ck_bound) << ',' << g17(r.clipped_mass)
            << ',' << g17(r.mass_drift) << '\n';
    if (!out) throw IoError("write failed on " + path);
}

CompareRow compare_snapshot(const Distribution* f_eps, const ScalarField& n_eps,
                            const VectorField& E_eps, double t_eps,
                            const ScalarField& n, const VectorField& E, double t,
                            const Grids& g, const PhysicsParams& p,
                            PoissonSolver& solver) {
    if (std::abs(t_eps - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw ConfigError("compare: snapshot times differ: " + g17(t_eps) + " vs " +
                          g17(t));
    if (n_eps.n1 != n.n1 || n_eps.n2 != n.n2)
        throw ConfigError("compare: density grids differ");

    CompareRow row;
    row.t = t;

    if (f_eps) {
        if (f_eps->nx1 != n.n1 || f_eps->nx2 != n.n2 || f_eps->nv1 != g.v.N ||
            f_eps->nv2 != g.v.N)
            throw ConfigError("compare: distribution does not match the grids");
        const ScalarField M = maxwellian(g.v, p.sigma);
        const size_t nv = f_eps->vblock();
        double acc = 0.0;
        for (size_t k = 0; k < f_eps->xnodes(); ++k) {
            const double* s = f_eps->a.data() + k * nv;
            const double nk = n.a[k];
            for (size_t c = 0; c < nv; ++c) acc += std::abs(s[c] - nk * M.a[c]);
        }
        row.l1_phase = acc * g.x.cell_area() * g.v.cell_area();
    }

    const CsiszarKullback ck = csiszar_kullback(n_eps, n, g.x);
    row.l1_density = ck.l1_distance;
    row.ck_bound = ck.ck_bound;

    double e2 = 0.0;
    for (size_t k = 0; k < E.c1.size(); ++k) {
        const double d1 = E_eps.c1.a[k] - E.c1.a[k];
        const double d2 = E_eps.c2.a[k] - E.c2.a[k];
        e2 += d1 * d1 + d2 * d2;
    }
    row.field_l2 = std::sqrt(e2 * g.x.cell_area());

    row.modulated = modulated_energy(n_eps, n, g.x, p, solver).total();
    return row;
}

void run_single(const RunConfig& cfg, std::ostream* log) {
    if (cfg.mode != RunMode::kinetic && cfg.mode != RunMode::limit)
        throw ConfigError(std::string("run: config mode is '") + to_string(cfg.mode) +
                          "'; use the matching subcommand");

    OutputLock lock(cfg.output);
    write_resolved_config(cfg, cfg.output);
    if (log)
        *log << "[run] scenario '" << cfg.scenario << "' mode " << to_string(cfg.mode)
             << ", output " << cfg.output << "\n";

    if (cfg.mode == RunMode::kinetic) {
        const KineticRunResult R = run_kinetic(kinetic_config(cfg));
        write_diagnostics_csv(R.records, cfg.output + "/diagnostics.csv");
        for (size_t k = 0; k < R.snapshots.size(); ++k) {
            const MomentSnapshot& s = R.snapshots[k];
            const std::string t = tag4(static_cast<int>(k));
            dump_field(s.n, cfg.output + "/n_" + t + ".fld");
            dump_field(s.E.c1, cfg.output + "/e1_" + t + ".fld");
            dump_field(s.E.c2, cfg.output + "/e2_" + t + ".fld");
        }
        if (log)
            *log << "[run] " << R.state.step << " steps, final mass "
                 << g17(R.records.back().mass) << ", free energy "
                 << g17(R.records.back().free_energy) << "\n";
    } else {
        const LimitRunResult R = run_limit(limit_config(cfg));
        write_diagnostics_csv(R.records, cfg.output + "/diagnostics.csv");
        for (size_t k = 0; k < R.snapshots.size(); ++k) {
            const LimitSnapshot& s = R.snapshots[k];
            const std::string t = tag4(static_cast<int>(k));
            dump_field(s.n, cfg.output + "/n_" + t + ".fld");
            dump_field(s.phi, cfg.output + "/phi_" + t + ".fld");
            dump_field(s.E.c1, cfg.output + "/e1_" + t + ".fld");
            dump_field(s.E.c2, cfg.output + "/e2_" + t + ".fld");
        }
        if (log)
            *log << "[run] " << R.state.step << " steps, final mass "
                 << g17(R.records.back().mass) << ", free energy "
                 << g17(R.records.back().free_energy) << "\n";
    }
}

CompareReport run_compare(const RunConfig& cfg, std::ostream* log) {
    if (cfg.mode != RunMode::compare)
        throw ConfigError(std::string("compare: config mode is '") +
                          to_string(cfg.mode) + "'; use the matching subcommand");

    OutputLock lock(cfg.output);
    write_resolved_config(cfg, cfg.output);
    if (log)
        *log << "[compare] scenario '" << cfg.scenario << "', epsilon "
             << g17(cfg.params.epsilon) << ", output " << cfg.output << "\n";

    const LimitRunResult lim = run_limit(limit_config(cfg));
    write_diagnostics_csv(lim.records, cfg.output + "/diagnostics-limit.csv");

    Grids g = make_grids(cfg.params, cfg.L, cfg.Nx, cfg.v_max, cfg.Nv);
    PoissonSolver solver(g.x, cfg.params);

    CompareReport rep;
    KineticRunConfig kc = kinetic_config(cfg);
    kc.on_snapshot = [&](int idx, const KineticState& st) {
        if (static_cast<size_t>(idx) >= lim.snapshots.size())
            throw ConfigError("compare: more kinetic snapshots than limit snapshots");
        const LimitSnapshot& ls = lim.snapshots[idx];
        rep.rows.push_back(compare_snapshot(&st.f, st.n, st.E, st.t, ls.n, ls.E, ls.t,
                                            g, cfg.params, solver));
    };
    const KineticRunResult R = run_kinetic(kc);
    write_diagnostics_csv(R.records, cfg.output + "/diagnostics-kinetic.csv");
    write_comparison_csv(rep.rows, cfg.output + "/comparison.csv");

    if (log && !rep.rows.empty())
        *log << "[compare] final time " << g17(rep.rows.back().t) << ": ||f-nM||_1 "
             << g17(rep.rows.back().l1_phase) << ", modulated energy "
             << g17(rep.rows.back().modulated) << "\n";
    return rep;
}

namespace {

void write_sweep_csv(const SweepReport& rep, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "epsilon,status,modulated_final,modulated_sup,rel_entropy_v_final,"
           "dissipation_over_eps,l1_kinetic_vs_limit,ck_bound,flux_l1\n";
    for (const SweepRow& r : rep.rows) {
        out << g17(r.epsilon) << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok)
            out << g17(r.modulated_final) << ',' << g17(r.modulated_sup) << ','
                << g17(r.rel_entropy_v_final) << ',' << g17(r.dissipation_over_eps)
                << ',' << g17(r.l1_kinetic_vs_limit) << ',' << g17(r.ck_bound) << ','
                << g17(r.flux_l1);
        else
            out << ",,,,,,";
        out << '\n';
    }
    if (!out) throw IoError("write failed on " + path);
}

void write_sweep_report(const SweepReport& rep, const RunConfig& cfg,
                        const std::string& path) {
    std::ofstream out = open_out(path);
    out << "sweep: scenario '" << cfg.scenario << "', " << rep.rows.size()
        << " epsilon values, T = " << g17(cfg.params.T) << "\n\n";
    char line[256];
    out << "epsilon     status  sup modulated  (1/eps) dissip  flux L1        "
           "runtime s\n";
    for (const SweepRow& r : rep.rows) {
        if (r.ok) {
            std::snprintf(line, sizeof line, "%-11g ok      %-14.6e %-15.6e %-14.6e %.2f\n",
                          r.epsilon, r.modulated_sup, r.dissipation_over_eps, r.flux_l1,
                          r.runtime_s);
            out << line;
        } else {
            std::snprintf(line, sizeof line, "%-11g failed  %s\n", r.epsilon,
                          r.error.c_str());
            out << line;
        }
    }
    out << "\nverdicts:\n";
    if (!rep.verdicts.have) {
        out << "  fewer than two successful rows, no verdicts\n";
    } else {
        auto yn = [](bool b) { return b ? "yes" : "no"; };
        out << "  sup modulated energy decreases with epsilon: "
            << yn(rep.verdicts.modulated_sup_decreasing) << "\n"
            << "  (1/eps) accumulated dissipation decreases with epsilon: "
            << yn(rep.verdicts.dissipation_decreasing) << "\n"
            << "  final flux remainder decreases with epsilon: "
            << yn(rep.verdicts.flux_decreasing) << "\n";
        if (std::isfinite(rep.verdicts.fitted_slope))
            out << "  fitted slope of log(sup modulated) vs log(epsilon): "
                << g17(rep.verdicts.fitted_slope) << " (positive: "
                << yn(rep.verdicts.fitted_slope > 0.0) << ")\n";
        else
            out << "  fitted slope of log(sup modulated) vs log(epsilon): n/a\n";
    }
    if (!out) throw IoError("write failed on " + path);
}

} // namespace

SweepReport run_sweep(const RunConfig& cfg, std::ostream* log) {
    if (cfg.mode != RunMode::sweep)
        throw ConfigError(std::string("sweep: config mode is '") + to_string(cfg.mode) +
                          "'; use the matching subcommand");
    if (cfg.epsilons.empty()) throw ConfigError("sweep: epsilons list is empty");
    if (cfg.snapshots < 3)
        throw ConfigError("sweep: need at least 3 snapshot times for the flux column");

    OutputLock lock(cfg.output);
    write_resolved_config(cfg, cfg.output);
    if (log)
        *log << "[sweep] scenario '" << cfg.scenario << "', " << cfg.epsilons.size()
             << " epsilon values, output " << cfg.output << "\n";

    SweepReport rep;
    rep.rows.resize(cfg.epsilons.size());
    for (size_t r = 0; r < cfg.epsilons.size(); ++r)
        rep.rows[r].epsilon = cfg.epsilons[r];

    // one limit trajectory serves every row: the limit model has no epsilon
    LimitRunResult lim;
    try {
        lim = run_limit(limit_config(cfg));
    } catch (const GyroError& e) {
        for (SweepRow& r : rep.rows) r.error = std::string("limit run: ") + e.what();
        if (log) *log << "[sweep] limit run failed: " << e.what() << "\n";
        write_sweep_csv(rep, cfg.output + "/sweep.csv");
        write_sweep_report(rep, cfg, cfg.output + "/sweep-report.txt");
        return rep;
    }
    write_diagnostics_csv(lim.records, cfg.output + "/diagnostics-limit.csv");

    Grids g = make_grids(cfg.params, cfg.L, cfg.Nx, cfg.v_max, cfg.Nv);
    PoissonSolver solver(g.x, cfg.params);
    const MagneticField mag = eval_magnetic(cfg.magnetic, g.x, cfg.params);

    // short directory tags; %.17g only to break a (pathological) %g collision
    std::vector<std::string> tags(rep.rows.size());
    for (size_t r = 0; r < rep.rows.size(); ++r) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%g", rep.rows[r].epsilon);
        tags[r] = buf;
        for (size_t k = 0; k < r; ++k)
            if (tags[k] == tags[r]) tags[r] = g17(rep.rows[r].epsilon);
    }

    for (size_t ri = 0; ri < rep.rows.size(); ++ri) {
        SweepRow& row = rep.rows[ri];
        RunConfig sub = cfg;
        sub.params.epsilon = row.epsilon;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::vector<CompareRow> rows;
            KineticRunConfig kc = kinetic_config(sub);
            kc.on_snapshot = [&](int idx, const KineticState& st) {
                if (static_cast<size_t>(idx) >= lim.snapshots.size())
                    throw ConfigError("sweep: more kinetic snapshots than limit snapshots");
                const LimitSnapshot& ls = lim.snapshots[idx];
                rows.push_back(compare_snapshot(&st.f, st.n, st.E, st.t, ls.n, ls.E,
                                                ls.t, g, sub.params, solver));
            };
            const KineticRunResult R = run_kinetic(kc);

            const std::string sub_dir = cfg.output + "/eps_" + tags[ri];
            std::error_code ec;
            std::filesystem::create_directories(sub_dir, ec);
            if (ec)
                throw IoError("cannot create " + sub_dir + ": " + ec.message());
            write_diagnostics_csv(R.records, sub_dir + "/diagnostics.csv");
            write_comparison_csv(rows, sub_dir + "/comparison.csv");

            row.modulated_final = rows.back().modulated;
            row.modulated_sup = 0.0;
            for (const CompareRow& c : rows)
                row.modulated_sup = std::max(row.modulated_sup, c.modulated);
            row.rel_entropy_v_final = R.records.back().rel_entropy_v;
            row.dissipation_over_eps = R.cum_dissipation / row.epsilon;
            row.l1_kinetic_vs_limit = rows.back().l1_density;
            row.ck_bound = rows.back().ck_bound;

            const auto& S = R.snapshots;
            const MomentResiduals res =
                moment_residuals(S[S.size() - 3], S[S.size() - 2], S[S.size() - 1],
                                 mag, g.x, sub.params);
            row.flux_l1 = res.flux_l1;
            row.ok = true;
        } catch (const GyroError& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) {
            if (row.ok)
                *log << "[sweep] eps " << g17(row.epsilon) << ": sup modulated "
                     << g17(row.modulated_sup) << ", " << g17(row.runtime_s) << " s\n";
            else
                *log << "[sweep] eps " << g17(row.epsilon) << " failed: " << row.error
                     << "\n";
        }
    }

    std::vector<const SweepRow*> ok;
    for (const SweepRow& r : rep.rows)
        if (r.ok) ok.push_back(&r);
    if (ok.size() >= 2) {
        SweepVerdicts& v = rep.verdicts;
        v.have = true;
        v.modulated_sup_decreasing = true;
        v.dissipation_decreasing = true;
        v.flux_decreasing = true;
        for (size_t k = 1; k < ok.size(); ++k) {
            // rows are ordered by decreasing epsilon
            v.modulated_sup_decreasing =
                v.modulated_sup_decreasing && ok[k]->modulated_sup < ok[k - 1]->modulated_sup;
            v.dissipation_decreasing =
                v.dissipation_decreasing &&
                ok[k]->dissipation_over_eps < ok[k - 1]->dissipation_over_eps;
            v.flux_decreasing = v.flux_decreasing && ok[k]->flux_l1 < ok[k - 1]->flux_l1;
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        size_t nfit = 0;
        for (const SweepRow* r : ok) {
            if (!(r->modulated_sup > 0.0)) continue;
            const double x = std::log(r->epsilon), y = std::log(r->modulated_sup);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++nfit;
        }
        if (nfit >= 2 && sxx * nfit - sx * sx > 0.0)
            v.fitted_slope = (sxy * nfit - sx * sy) / (sxx * nfit - sx * sx);
        else
            v.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    }

    write_sweep_csv(rep, cfg.output + "/sweep.csv");
    write_sweep_report(rep, cfg, cfg.output + "/sweep-report.txt");
    if (log && rep.verdicts.have)
        *log << "[sweep] sup modulated decreasing: "
             << (rep.verdicts.modulated_sup_decreasing ? "yes" : "no")
             << ", fitted slope " << g17(rep.verdicts.fitted_slope) << "\n";
    return rep;
}

} // namespace gyrodrift
