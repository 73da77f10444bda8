// zeno: stability sweeps, time-series runs and the coupling estimate.
//
// Settings are resolved as defaults, then --config, then individual flags.

#include "zeno/cli/commands.hpp"
#include "zeno/errors.hpp"
#include "zeno/version.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace zeno::cli;

struct Common {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON configuration file");
    cmd->add_option("--out", c.out_path, "Output file (default: stdout)");
    cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

template <typename T>
void override_with(T& field, const std::optional<T>& flag) {
    if (flag) field = *flag;
}

int emit(const Common& common, const CommandResult& result) {
    const Format format = format_from_string(common.format);
    if (common.out_path.empty()) {
        write(std::cout, format, result.meta, result.table);
    } else {
        std::ofstream out(common.out_path, std::ios::binary);
        if (!out) throw UsageError("cannot open output file '" + common.out_path + "'");
        write(out, format, result.meta, result.table);
    }
    if (!result.message.empty()) std::cerr << "zeno: " << result.message << '\n';
    return result.exit_code;
}

struct SweepFlags {
    std::optional<double> gamma_min, gamma_max, omega_min, omega_max, epsilon, tau1, tau2;
    std::optional<int> gamma_steps, omega_steps;
    bool cross_check = false;
    std::optional<std::uint64_t> cross_periods;
    std::optional<unsigned> threads;
};

struct SimulateFlags {
    std::optional<int> modes, cutoff, max_cutoff;
    std::optional<double> gamma, tau1, omega, tau2, guard, leakage_tol, epsilon;
    std::optional<std::uint64_t> periods;
    std::optional<std::string> backend, initial;
    bool sample_segments = false;
};

struct EstimateFlags {
    std::optional<double> eta, chi2, omega_a, omega_b, pump_intensity, length;
};

int run_sweep_command(const Common& common, const SweepFlags& f) {
    SweepConfig c = common.config_path.empty() ? SweepConfig{}
                                               : sweep_config_from_json(load_json_file(common.config_path));
    override_with(c.gamma_tau1.min, f.gamma_min);
    override_with(c.gamma_tau1.max, f.gamma_max);
    override_with(c.gamma_tau1.steps, f.gamma_steps);
    override_with(c.omega_tau2.min, f.omega_min);
    override_with(c.omega_tau2.max, f.omega_max);
    override_with(c.omega_tau2.steps, f.omega_steps);
    override_with(c.epsilon, f.epsilon);
    override_with(c.tau1, f.tau1);
    override_with(c.tau2, f.tau2);
    if (f.cross_check) c.cross_check.enabled = true;
    override_with(c.cross_check.periods, f.cross_periods);
    validate(c);
    return emit(common, run_sweep(c, f.threads ? std::min(*f.threads, sweep_threads()) : sweep_threads()));
}

int run_simulate_command(const Common& common, const SimulateFlags& f) {
    SimulateConfig c = common.config_path.empty() ? SimulateConfig{}
                                                  : simulate_config_from_json(load_json_file(common.config_path));
    override_with(c.modes, f.modes);
    override_with(c.gamma, f.gamma);
    override_with(c.tau1, f.tau1);
    override_with(c.omega, f.omega);
    override_with(c.tau2, f.tau2);
    override_with(c.periods, f.periods);
    if (f.backend) c.backend = backend_from_string(*f.backend);
    if (f.cutoff) c.cutoff = *f.cutoff;
    override_with(c.max_cutoff, f.max_cutoff);
    override_with(c.divergence_guard, f.guard);
    override_with(c.leakage_tolerance, f.leakage_tol);
    override_with(c.epsilon, f.epsilon);
    if (f.sample_segments) c.sample_segments = true;
    if (f.initial) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(*f.initial);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(std::string("--initial: ") + e.what());
        }
        c.initial = simulate_config_from_json({{"initial", j}}).initial;
    }
    validate(c);
    return emit(common, run_simulate(c));
}

int run_estimate_command(const Common& common, const EstimateFlags& f) {
    EstimateInputs in = common.config_path.empty() ? EstimateInputs{}
                                                   : estimate_inputs_from_json(load_json_file(common.config_path));
    override_with(in.eta, f.eta);
    override_with(in.chi2, f.chi2);
    override_with(in.omega_a, f.omega_a);
    override_with(in.omega_b, f.omega_b);
    override_with(in.pump_intensity, f.pump_intensity);
    override_with(in.length, f.length);
    validate(in);
    return emit(common, run_estimate(in));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switched down-conversion / beam-splitter drive: stability and photon statistics"};
    app.set_version_flag("--version", std::string(zeno::kVersion));
    app.require_subcommand(1);

    Common sweep_common, sim_common, est_common;
    SweepFlags sf;
    SimulateFlags mf;
    EstimateFlags ef;

    auto* sweep = app.add_subcommand("sweep", "Stability map over a (gamma*tau1, omega*tau2) grid");
    add_common(sweep, sweep_common);
    sweep->add_option("--gamma-min", sf.gamma_min);
    sweep->add_option("--gamma-max", sf.gamma_max);
    sweep->add_option("--gamma-steps", sf.gamma_steps);
    sweep->add_option("--omega-min", sf.omega_min);
    sweep->add_option("--omega-max", sf.omega_max);
    sweep->add_option("--omega-steps", sf.omega_steps);
    sweep->add_option("--epsilon", sf.epsilon, "Marginal tolerance on |Tr A|/2 - 1");
    sweep->add_option("--tau1", sf.tau1);
    sweep->add_option("--tau2", sf.tau2);
    sweep->add_flag("--cross-check", sf.cross_check, "Add a Gaussian boundedness column");
    sweep->add_option("--cross-periods", sf.cross_periods);
    sweep->add_option("--threads", sf.threads, "Worker count (also capped by ZF_THREADS)");

    auto* simulate = app.add_subcommand("simulate", "Per-period photon numbers");
    add_common(simulate, sim_common);
    simulate->add_option("--modes", mf.modes);
    simulate->add_option("--gamma", mf.gamma);
    simulate->add_option("--tau1", mf.tau1);
    simulate->add_option("--omega", mf.omega);
    simulate->add_option("--tau2", mf.tau2);
    simulate->add_option("--periods", mf.periods);
    simulate->add_option("--backend", mf.backend, "gaussian, fock or both");
    simulate->add_option("--cutoff", mf.cutoff, "Fock cutoff per mode");
    simulate->add_option("--max-cutoff", mf.max_cutoff);
    simulate->add_option("--guard", mf.guard, "Divergence guard on the total photon number");
    simulate->add_option("--leakage-tol", mf.leakage_tol);
    simulate->add_option("--epsilon", mf.epsilon);
    simulate->add_option("--initial", mf.initial, R"(JSON array, e.g. '[{"alpha":[0.5,0]},{"n":1}]')");
    simulate->add_flag("--sample-segments", mf.sample_segments);

    auto* estimate = app.add_subcommand("estimate", "Coupling constant from crystal parameters (MKS)");
    add_common(estimate, est_common);
    estimate->add_option("--eta", ef.eta, "Impedance (ohm)");
    estimate->add_option("--chi2", ef.chi2, "Second-order susceptibility (C V^-2)");
    estimate->add_option("--omega-a", ef.omega_a, "s^-1");
    estimate->add_option("--omega-b", ef.omega_b, "s^-1");
    estimate->add_option("--pump-intensity", ef.pump_intensity, "W m^-2");
    estimate->add_option("--length", ef.length, "Crystal length (m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sweep) return run_sweep_command(sweep_common, sf);
        if (*simulate) return run_simulate_command(sim_common, mf);
        return run_estimate_command(est_common, ef);
    } catch (const UsageError& e) {
        std::cerr << "zeno: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // InvalidParameter, InvalidCutoff, InvalidState: bad inputs.
        std::cerr << "zeno: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "zeno: " << e.what() << '\n';
        return kExitGuard;
    }
}
