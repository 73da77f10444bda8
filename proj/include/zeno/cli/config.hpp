#pragma once

// Resolved configurations for the zeno subcommands. Each config has JSON
// (de)serialization and a validate() that throws UsageError; the CLI maps
// UsageError to exit code 2.

#include "json.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double min = 0.0;
    double max = 1.0;
    int steps = 2;

    /// steps equally spaced values, both ends included.
    std::vector<double> values() const;
};

struct CrossCheck {
    bool enabled = false;
    std::uint64_t periods = 10000;
    double divergence_guard = 1e12;
    /// Disagreements with |half_trace - 1| inside this band are not flagged.
    double marginal_band = 1e-3;
};

struct SweepConfig {
    Range gamma_tau1{0.0, 1.5, 151};
    Range omega_tau2{0.0, 3.141592653589793, 151};
    double epsilon = 1e-9;
    /// Segment durations; only the period tau1 + tau2 (for the Floquet
    /// exponent) depends on them.
    double tau1 = 0.5;
    double tau2 = 0.5;
    CrossCheck cross_check;
};

enum class Backend { Gaussian, Fock, Both };

/// Per-mode initial state. Number states are Fock-only; alpha and squeezing
/// may be combined on the Gaussian backend only.
struct ModeSpec {
    int number = 0;
    std::complex<double> alpha{0.0, 0.0};
    double squeeze_r = 0.0;
    double squeeze_phi = 0.0;
};

struct SimulateConfig {
    int modes = 2;
    double gamma = 0.0;
    double tau1 = 0.5;
    double omega = 0.0;
    double tau2 = 0.5;
    std::uint64_t periods = 10;
    Backend backend = Backend::Gaussian;
    /// Fock cutoff; the default policy applies when absent.
    std::optional<int> cutoff;
    int max_cutoff = 60;
    /// One entry per mode; empty means vacuum.
    std::vector<ModeSpec> initial;
    double divergence_guard = 1e12;
    double leakage_tolerance = 1e-8;
    bool sample_segments = false;
    double epsilon = 1e-9;
};

/// MKS inputs of the classical parametric-gain estimate. Defaults are
/// typical values for a bulk down-conversion crystal.
struct EstimateInputs {
    double eta = 220.0;             // ohm
    double chi2 = 2e-23;            // C V^-2
    double omega_a = 3e15;          // s^-1
    double omega_b = 3e15;          // s^-1
    double pump_intensity = 1e5;    // W m^-2
    double length = 1e-2;           // m
};

void validate(const SweepConfig& config);
void validate(const SimulateConfig& config);
void validate(const EstimateInputs& inputs);

nlohmann::json to_json(const SweepConfig& config);
nlohmann::json to_json(const SimulateConfig& config);
nlohmann::json to_json(const EstimateInputs& inputs);

/// Missing keys keep their defaults; unknown keys are rejected.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
SimulateConfig simulate_config_from_json(const nlohmann::json& j);
EstimateInputs estimate_inputs_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

std::string to_string(Backend backend);
Backend backend_from_string(const std::string& name);

} // namespace zeno::cli
