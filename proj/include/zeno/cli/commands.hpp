#pragma once

#include "zeno/cli/config.hpp"
#include "zeno/cli/output.hpp"
#include "zeno/floquet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace zeno::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGuard = 1;
inline constexpr int kExitUsage = 2;

struct CommandResult {
    Meta meta;
    Table table;
    int exit_code = kExitOk;
    /// Human-readable note for stderr (guard trips, flagged disagreements).
    std::string message;
};

/// Worker count for sweeps: hardware concurrency, capped by ZF_THREADS.
unsigned sweep_threads();

struct SweepPoint {
    double gamma_tau1 = 0.0;
    double omega_tau2 = 0.0;
    floquet::StabilityReport report;
    /// Gaussian cross-check; set only when enabled.
    std::optional<bool> bounded;
    bool disagreement = false;
};

/// Grid points in gamma-major order, evaluated on `threads` workers.
std::vector<SweepPoint> sweep(const SweepConfig& config, unsigned threads);
CommandResult run_sweep(const SweepConfig& config, unsigned threads = sweep_threads());

struct RunRow {
    std::uint64_t period = 0;
    double time = 0.0;
    std::optional<std::vector<double>> gaussian_n;
    std::optional<std::vector<double>> fock_n;
    std::optional<double> discrepancy;
    std::optional<double> norm_drift;
    std::optional<double> leakage;
    std::string status = "ok";
};

struct RunRecord {
    SimulateConfig config;
    floquet::StabilityReport report;
    std::optional<int> cutoff;
    std::vector<RunRow> rows;
    bool guard_tripped = false;
};

RunRecord simulate(const SimulateConfig& config);
CommandResult run_simulate(const SimulateConfig& config);

struct CouplingEstimate {
    double gamma_c = 0.0;     // m^-1
    double gamma_tau1 = 0.0;  // dimensionless
};

/// Gamma_c = sqrt(eta^3 / 2 * chi2^2 * omega_a * omega_b * I_p), and the
/// single-pass product Gamma_c * l.
CouplingEstimate estimate_coupling(const EstimateInputs& inputs);
CommandResult run_estimate(const EstimateInputs& inputs);

} // namespace zeno::cli
