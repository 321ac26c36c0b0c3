#pragma once
/// @file harness.hpp
/// @brief Experiment drivers: single runs, the epsilon sweep, and the
///        kinetic-vs-limit comparison, with their CSV artifacts.
///
/// Each driver claims the output directory through a lockfile, echoes the
/// fully resolved configuration, and writes CSV files whose numeric cells are
/// printed with %.17g so identical configs reproduce identical bytes.
/// Wall-clock timings never enter a CSV; they live in the in-memory report
/// and the human-readable sweep-report.txt.

#include <ostream>
#include <string>
#include <vector>

#include "gyrodrift/config.hpp"
#include "gyrodrift/diagnostics.hpp"
#include "gyrodrift/guiding_center.hpp"
#include "gyrodrift/kinetic.hpp"

namespace gyrodrift {

/// Column order of diagnostics.csv, fixed.
extern const char* const kDiagnosticsHeader;

/// Creates the directory, claims dir/lock exclusively, and releases it on
/// destruction. A second claim while the file exists raises IoError.
class OutputLock {
public:
    explicit OutputLock(const std::string& dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::string path_;
};

void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& rows,
                           const std::string& path);

/// One matched-time distance row between a kinetic state (or bare moments)
/// and the limit solution.
struct CompareRow {
    double t = 0.0;
    double l1_phase = 0.0;   // ||f - n M||_1 over phase space; 0 without f
    double l1_density = 0.0; // ||n_eps - n||_1
    double field_l2 = 0.0;   // ||E_eps - E||_2
    double modulated = 0.0;  // relative entropy of densities + field energy
    double ck_bound = 0.0;   // Csiszar-Kullback bound on l1_density
};

/// Distances at one matched time; the snapshot times must agree to
/// 1e-9 max(1, t) or the pairing is rejected (ConfigError). The CK
/// inequality is audited as a side effect. `f_eps` may be null when no
/// phase-space data is available for this row.
CompareRow compare_snapshot(const Distribution* f_eps, const ScalarField& n_eps,
                            const VectorField& E_eps, double t_eps,
                            const ScalarField& n, const VectorField& E, double t,
                            const Grids& g, const PhysicsParams& p,
                            PoissonSolver& solver);

struct CompareReport {
    std::vector<CompareRow> rows;
};

struct SweepRow {
    double epsilon = 0.0;
    bool ok = false;
    std::string error; // failure message when !ok

    double modulated_final = 0.0;
    double modulated_sup = 0.0;
    double rel_entropy_v_final = 0.0;
    double dissipation_over_eps = 0.0; // (1/eps) * time-integrated dissipation
    double l1_kinetic_vs_limit = 0.0;  // density L1 at the final time
    double ck_bound = 0.0;             // at the final time
    double flux_l1 = 0.0;              // ||F||_1 at the last centered snapshot
    double runtime_s = 0.0;            // kinetic member run, wall clock
};

struct SweepVerdicts {
    bool have = false; // false when fewer than two rows succeeded
    bool modulated_sup_decreasing = false;
    bool dissipation_decreasing = false;
    bool flux_decreasing = false;
    double fitted_slope = 0.0; // least squares, log(sup modulated) vs log(eps)
};

struct SweepReport {
    std::vector<SweepRow> rows;
    SweepVerdicts verdicts;
};

/// mode kinetic or limit: one run, artifacts into cfg.output.
void run_single(const RunConfig& cfg, std::ostream* log);

/// mode compare: limit run first, then the kinetic run at cfg epsilon with
/// per-snapshot distances; artifacts into cfg.output.
CompareReport run_compare(const RunConfig& cfg, std::ostream* log);

/// mode sweep: one shared limit run, one kinetic run per epsilon. A failing
/// member marks its row and the sweep continues.
SweepReport run_sweep(const RunConfig& cfg, std::ostream* log);

} // namespace gyrodrift
