#include "zeno/cli/commands.hpp"

#include "zeno/fock.hpp"
#include "zeno/gaussian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace zeno::cli {

using floquet::DriveSchedule;
using floquet::Stability;

unsigned sweep_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ZF_THREADS"); env && *env) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (*end != '\0' || cap < 1) throw UsageError("ZF_THREADS must be a positive integer");
        n = std::min<unsigned long>(n, static_cast<unsigned long>(cap));
    }
    return n;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

SweepPoint evaluate_point(const SweepConfig& config, double g, double w) {
    SweepPoint p;
    p.gamma_tau1 = g;
    p.omega_tau2 = w;
    const auto schedule = DriveSchedule::from_products(g, w, 0, config.tau1, config.tau2);
    p.report = floquet::stability(schedule, config.epsilon);

    if (config.cross_check.enabled) {
        const auto run = DriveSchedule::from_products(g, w, config.cross_check.periods, config.tau1, config.tau2);
        const auto summary =
            gaussian::photon_summary(gaussian::GaussianState::vacuum(2), run, config.cross_check.divergence_guard);
        p.bounded = summary.status == gaussian::TrajectoryStatus::Completed;
        const bool outside_band = std::abs(p.report.half_trace - 1.0) > config.cross_check.marginal_band;
        const bool analytic_bounded = p.report.classification != Stability::Unstable;
        p.disagreement = outside_band && *p.bounded != analytic_bounded;
    }
    return p;
}

} // namespace

std::vector<SweepPoint> sweep(const SweepConfig& config, unsigned threads) {
    validate(config);
    const auto gs = config.gamma_tau1.values();
    const auto ws = config.omega_tau2.values();
    const std::size_t total = gs.size() * ws.size();
    std::vector<SweepPoint> out(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t i = next++; i < total; i = next++) {
                out[i] = evaluate_point(config, gs[i / ws.size()], ws[i % ws.size()]);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = total;
        }
    };

    threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(1, total)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

CommandResult run_sweep(const SweepConfig& config, unsigned threads) {
    const auto points = sweep(config, threads);

    CommandResult r;
    r.meta = make_meta("sweep", to_json(config));
    r.table.columns = {"gamma_tau1", "omega_tau2", "half_trace", "classification", "floquet_exponent"};
    if (config.cross_check.enabled) {
        r.table.columns.push_back("cross_check");
        r.table.columns.push_back("disagreement");
    }
    std::size_t flagged = 0;
    for (const auto& p : points) {
        std::vector<Cell> row{p.gamma_tau1, p.omega_tau2, p.report.half_trace,
                              std::string(floquet::to_string(p.report.classification)), p.report.floquet_exponent};
        if (p.bounded) {
            row.emplace_back(std::string(*p.bounded ? "bounded" : "diverged"));
            row.emplace_back(std::int64_t{p.disagreement ? 1 : 0});
            flagged += p.disagreement ? 1 : 0;
        }
        r.table.rows.push_back(std::move(row));
    }
    if (flagged > 0) {
        r.message = std::to_string(flagged) + " grid point(s) where the simulated cross-check contradicts the "
                                              "analytic classification outside the marginal band";
    }
    return r;
}

// ---------------------------------------------------------------------------
// simulate

namespace {

DriveSchedule schedule_of(const SimulateConfig& c) {
    return DriveSchedule(c.gamma, c.tau1, c.omega, c.tau2, c.periods);
}

std::vector<ModeSpec> initial_modes(const SimulateConfig& c) {
    return c.initial.empty() ? std::vector<ModeSpec>(static_cast<std::size_t>(c.modes)) : c.initial;
}

std::vector<RunRow> gaussian_rows(const SimulateConfig& c, const DriveSchedule& schedule, bool& tripped) {
    std::vector<gaussian::ModePreparation> prep;
    for (const auto& m : initial_modes(c)) prep.push_back({m.alpha, m.squeeze_r, m.squeeze_phi});
    const auto traj = gaussian::evolve(gaussian::GaussianState::prepare(prep), schedule,
                                       {c.sample_segments, c.divergence_guard});

    std::vector<RunRow> rows;
    rows.reserve(traj.states.size());
    const std::size_t per_period = c.sample_segments ? 2 : 1;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        RunRow row;
        row.period = (i + per_period - 1) / per_period;
        row.time = traj.times[i];
        row.gaussian_n = gaussian::photon_numbers(traj.states[i]).per_mode;
        rows.push_back(std::move(row));
    }
    tripped = traj.status == gaussian::TrajectoryStatus::Diverged;
    if (tripped) rows.back().status = "diverged";
    return rows;
}

std::vector<RunRow> fock_rows(const SimulateConfig& c, const DriveSchedule& schedule, int cutoff, bool& tripped) {
    std::vector<fock::ModePreparation> prep;
    for (const auto& m : initial_modes(c)) prep.push_back({m.number, m.alpha, m.squeeze_r, m.squeeze_phi});
    const auto state = fock::FockState::prepare(prep, cutoff);
    const auto result = fock::propagate(state, schedule, {c.leakage_tolerance, false, true});

    std::vector<RunRow> rows;
    rows.reserve(result.observables.size());
    for (const auto& o : result.observables) {
        RunRow row;
        row.period = o.period;
        row.time = static_cast<double>(o.period) * schedule.period();
        row.fock_n = c.modes == 1 ? std::vector<double>{o.n_a} : std::vector<double>{o.n_a, o.n_b};
        row.norm_drift = o.norm_drift;
        row.leakage = o.leakage;
        rows.push_back(std::move(row));
    }
    tripped = !result.truncation_safe;
    if (tripped) rows.back().status = "truncation_unsafe";
    return rows;
}

} // namespace

RunRecord simulate(const SimulateConfig& config) {
    validate(config);
    RunRecord rec;
    rec.config = config;
    const auto schedule = schedule_of(config);
    rec.report = floquet::classify(floquet::monodromy(schedule), schedule.period(), config.epsilon);

    bool g_trip = false;
    bool f_trip = false;
    std::vector<RunRow> g_rows;
    std::vector<RunRow> f_rows;
    if (config.backend != Backend::Fock) g_rows = gaussian_rows(config, schedule, g_trip);
    if (config.backend != Backend::Gaussian) {
        rec.cutoff = config.cutoff ? *config.cutoff : fock::default_cutoff(schedule, config.max_cutoff);
        f_rows = fock_rows(config, schedule, *rec.cutoff, f_trip);
    }
    rec.guard_tripped = g_trip || f_trip;

    if (config.backend == Backend::Gaussian) {
        rec.rows = std::move(g_rows);
    } else if (config.backend == Backend::Fock) {
        rec.rows = std::move(f_rows);
    } else {
        // Both series stop at the first guard trip of either backend.
        const std::size_t n = std::min(g_rows.size(), f_rows.size());
        for (std::size_t i = 0; i < n; ++i) {
            RunRow row = std::move(g_rows[i]);
            const auto& f = f_rows[i];
            row.fock_n = f.fock_n;
            row.norm_drift = f.norm_drift;
            row.leakage = f.leakage;
            double d = 0.0;
            for (std::size_t k = 0; k < row.gaussian_n->size(); ++k) {
                d = std::max(d, std::abs((*row.gaussian_n)[k] - (*row.fock_n)[k]));
            }
            row.discrepancy = d;
            if (f.status != "ok") row.status = f.status;
            rec.rows.push_back(std::move(row));
        }
    }
    return rec;
}

CommandResult run_simulate(const SimulateConfig& config) {
    const auto rec = simulate(config);
    const bool two = config.modes == 2;
    const bool gauss = config.backend != Backend::Fock;
    const bool fock = config.backend != Backend::Gaussian;

    CommandResult r;
    auto meta_config = to_json(config);
    meta_config["resolved_cutoff"] = rec.cutoff ? nlohmann::json(*rec.cutoff) : nlohmann::json(nullptr);
    r.meta = make_meta("simulate", std::move(meta_config));

    auto& cols = r.table.columns;
    cols = {"period", "time"};
    auto add_n = [&](const std::string& prefix) {
        cols.push_back(prefix + "n_a");
        if (two) cols.push_back(prefix + "n_b");
        cols.push_back(prefix + "n_total");
    };
    if (gauss) add_n("");
    if (fock) add_n(gauss ? "fock_" : "");
    if (gauss && fock) cols.push_back("discrepancy");
    if (fock) {
        cols.push_back("norm_drift");
        cols.push_back("leakage");
    }
    for (const char* c : {"half_trace", "classification", "status"}) cols.emplace_back(c);

    auto push_n = [](std::vector<Cell>& row, const std::vector<double>& n) {
        double total = 0.0;
        for (double v : n) {
            row.emplace_back(v);
            total += v;
        }
        row.emplace_back(total);
    };
    for (const auto& rr : rec.rows) {
        std::vector<Cell> row{static_cast<std::int64_t>(rr.period), rr.time};
        if (gauss) push_n(row, *rr.gaussian_n);
        if (fock) push_n(row, *rr.fock_n);
        if (gauss && fock) row.emplace_back(*rr.discrepancy);
        if (fock) {
            row.emplace_back(*rr.norm_drift);
            row.emplace_back(*rr.leakage);
        }
        row.emplace_back(rec.report.half_trace);
        row.emplace_back(std::string(floquet::to_string(rec.report.classification)));
        row.emplace_back(rr.status);
        r.table.rows.push_back(std::move(row));
    }

    if (rec.guard_tripped) {
        r.exit_code = kExitGuard;
        const auto& last = rec.rows.back();
        r.message = "numerical guard tripped (" + last.status + ") at period " + std::to_string(last.period) +
                    "; output is partial";
    }
    return r;
}

// ---------------------------------------------------------------------------
// estimate

CouplingEstimate estimate_coupling(const EstimateInputs& in) {
    validate(in);
    CouplingEstimate e;
    e.gamma_c = std::sqrt(in.eta * in.eta * in.eta / 2.0 * in.chi2 * in.chi2 * in.omega_a * in.omega_b *
                          in.pump_intensity);
    e.gamma_tau1 = e.gamma_c * in.length;
    return e;
}

CommandResult run_estimate(const EstimateInputs& inputs) {
    const auto e = estimate_coupling(inputs);
    CommandResult r;
    r.meta = make_meta("estimate", to_json(inputs));
    r.table.columns = {"eta", "chi2", "omega_a", "omega_b", "pump_intensity", "length", "gamma_c", "gamma_tau1"};
    r.table.rows.push_back({inputs.eta, inputs.chi2, inputs.omega_a, inputs.omega_b, inputs.pump_intensity,
                            inputs.length, e.gamma_c, e.gamma_tau1});
    return r;
}

} // namespace zeno::cli
