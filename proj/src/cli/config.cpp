#include "zeno/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace zeno::cli {

using nlohmann::json;

namespace {

// Pulls typed fields out of a JSON object and rejects keys nobody asked for.
class FieldReader {
public:
    FieldReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw UsageError(context_ + ": expected a JSON object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw UsageError(context_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key())) throw UsageError(context_ + ": unknown key '" + item.key() + "'");
        }
    }

private:
    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void validate_range(const Range& r, const char* name) {
    require(std::isfinite(r.min) && std::isfinite(r.max), std::string(name) + ": range must be finite");
    require(r.min >= 0.0, std::string(name) + ": range must be non-negative");
    require(r.min < r.max, std::string(name) + ": min must be below max");
    require(r.steps >= 2, std::string(name) + ": at least 2 steps required");
}

Range range_from_json(const json& j, const char* name) {
    Range r;
    FieldReader f(j, name);
    f.read("min", r.min);
    f.read("max", r.max);
    f.read("steps", r.steps);
    f.finish();
    return r;
}

json to_json(const Range& r) { return {{"min", r.min}, {"max", r.max}, {"steps", r.steps}}; }

json to_json(const ModeSpec& m) {
    json j = json::object();
    if (m.number != 0) j["n"] = m.number;
    if (m.alpha != std::complex<double>(0.0, 0.0)) j["alpha"] = {m.alpha.real(), m.alpha.imag()};
    if (m.squeeze_r != 0.0) {
        j["r"] = m.squeeze_r;
        j["phi"] = m.squeeze_phi;
    }
    return j;
}

ModeSpec mode_from_json(const json& j) {
    ModeSpec m;
    FieldReader f(j, "initial[]");
    f.read("n", m.number);
    std::vector<double> alpha;
    f.read("alpha", alpha);
    if (!alpha.empty()) {
        require(alpha.size() == 2, "initial[].alpha must be [re, im]");
        m.alpha = {alpha[0], alpha[1]};
    }
    f.read("r", m.squeeze_r);
    f.read("phi", m.squeeze_phi);
    f.finish();
    return m;
}

} // namespace

std::vector<double> Range::values() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        out.push_back(i + 1 == steps ? max : min + (max - min) * i / (steps - 1));
    }
    return out;
}

std::string to_string(Backend backend) {
    switch (backend) {
    case Backend::Gaussian: return "gaussian";
    case Backend::Fock: return "fock";
    case Backend::Both: return "both";
    }
    return "unknown";
}

Backend backend_from_string(const std::string& name) {
    if (name == "gaussian") return Backend::Gaussian;
    if (name == "fock") return Backend::Fock;
    if (name == "both") return Backend::Both;
    throw UsageError("unknown backend '" + name + "' (expected gaussian, fock or both)");
}

// ---------------------------------------------------------------------------

void validate(const SweepConfig& c) {
    validate_range(c.gamma_tau1, "gamma_tau1");
    validate_range(c.omega_tau2, "omega_tau2");
    require(finite_non_negative(c.epsilon), "epsilon must be finite and non-negative");
    require(finite_positive(c.tau1) && finite_positive(c.tau2), "tau1 and tau2 must be positive");
    if (c.cross_check.enabled) {
        require(c.cross_check.periods >= 1, "cross_check.periods must be at least 1");
        require(finite_positive(c.cross_check.divergence_guard), "cross_check.divergence_guard must be positive");
        require(finite_non_negative(c.cross_check.marginal_band), "cross_check.marginal_band must be non-negative");
    }
}

void validate(const SimulateConfig& c) {
    require(c.modes == 1 || c.modes == 2, "modes must be 1 or 2");
    require(finite_non_negative(c.gamma) && finite_non_negative(c.omega), "rates must be finite and non-negative");
    require(finite_non_negative(c.tau1) && finite_non_negative(c.tau2), "durations must be finite and non-negative");
    require(c.periods == 0 || c.tau1 + c.tau2 > 0.0, "period tau1 + tau2 must be positive");
    require(!c.cutoff || *c.cutoff >= 1, "cutoff must be at least 1");
    require(c.max_cutoff >= 1, "max_cutoff must be at least 1");
    require(finite_positive(c.divergence_guard), "divergence_guard must be positive");
    require(finite_positive(c.leakage_tolerance), "leakage_tolerance must be positive");
    require(finite_non_negative(c.epsilon), "epsilon must be finite and non-negative");
    require(!c.sample_segments || c.backend == Backend::Gaussian, "sample_segments needs the gaussian backend");
    require(c.initial.empty() || static_cast<int>(c.initial.size()) == c.modes,
            "initial must list one entry per mode");
    for (const auto& m : c.initial) {
        require(m.number >= 0, "initial[].n must be non-negative");
        require(std::isfinite(m.alpha.real()) && std::isfinite(m.alpha.imag()), "initial[].alpha must be finite");
        require(finite_non_negative(m.squeeze_r) && std::isfinite(m.squeeze_phi),
                "initial[].r must be non-negative and phi finite");
        const bool coherent = m.alpha != std::complex<double>(0.0, 0.0);
        const bool squeezed = m.squeeze_r != 0.0;
        require(m.number == 0 || c.backend == Backend::Fock,
                "number-state inputs are only supported by the fock backend");
        require(m.number == 0 || (!coherent && !squeezed), "initial[]: a number state cannot be displaced or squeezed");
        require(c.backend == Backend::Gaussian || !(coherent && squeezed),
                "displaced squeezed inputs are only supported by the gaussian backend");
    }
}

void validate(const EstimateInputs& in) {
    for (double v : {in.eta, in.chi2, in.omega_a, in.omega_b, in.pump_intensity, in.length}) {
        require(finite_positive(v), "estimate inputs must be finite and strictly positive");
    }
}

// ---------------------------------------------------------------------------

json to_json(const SweepConfig& c) {
    return {{"gamma_tau1", to_json(c.gamma_tau1)},
            {"omega_tau2", to_json(c.omega_tau2)},
            {"epsilon", c.epsilon},
            {"tau1", c.tau1},
            {"tau2", c.tau2},
            {"cross_check",
             {{"enabled", c.cross_check.enabled},
              {"periods", c.cross_check.periods},
              {"divergence_guard", c.cross_check.divergence_guard},
              {"marginal_band", c.cross_check.marginal_band}}}};
}

json to_json(const SimulateConfig& c) {
    json initial = json::array();
    for (const auto& m : c.initial) initial.push_back(to_json(m));
    return {{"modes", c.modes},
            {"gamma", c.gamma},
            {"tau1", c.tau1},
            {"omega", c.omega},
            {"tau2", c.tau2},
            {"periods", c.periods},
            {"backend", to_string(c.backend)},
            {"cutoff", c.cutoff ? json(*c.cutoff) : json(nullptr)},
            {"max_cutoff", c.max_cutoff},
            {"initial", initial},
            {"divergence_guard", c.divergence_guard},
            {"leakage_tolerance", c.leakage_tolerance},
            {"sample_segments", c.sample_segments},
            {"epsilon", c.epsilon}};
}

json to_json(const EstimateInputs& in) {
    return {{"eta", in.eta},
            {"chi2", in.chi2},
            {"omega_a", in.omega_a},
            {"omega_b", in.omega_b},
            {"pump_intensity", in.pump_intensity},
            {"length", in.length}};
}

SweepConfig sweep_config_from_json(const json& j) {
    SweepConfig c;
    FieldReader f(j, "sweep");
    if (const auto* r = f.child("gamma_tau1")) c.gamma_tau1 = range_from_json(*r, "gamma_tau1");
    if (const auto* r = f.child("omega_tau2")) c.omega_tau2 = range_from_json(*r, "omega_tau2");
    f.read("epsilon", c.epsilon);
    f.read("tau1", c.tau1);
    f.read("tau2", c.tau2);
    if (const auto* x = f.child("cross_check")) {
        FieldReader g(*x, "cross_check");
        g.read("enabled", c.cross_check.enabled);
        g.read("periods", c.cross_check.periods);
        g.read("divergence_guard", c.cross_check.divergence_guard);
        g.read("marginal_band", c.cross_check.marginal_band);
        g.finish();
    }
    f.finish();
    return c;
}

SimulateConfig simulate_config_from_json(const json& j) {
    SimulateConfig c;
    FieldReader f(j, "simulate");
    f.read("modes", c.modes);
    f.read("gamma", c.gamma);
    f.read("tau1", c.tau1);
    f.read("omega", c.omega);
    f.read("tau2", c.tau2);
    f.read("periods", c.periods);
    std::string backend = to_string(c.backend);
    f.read("backend", backend);
    c.backend = backend_from_string(backend);
    if (const auto* cut = f.child("cutoff"); cut && !cut->is_null()) {
        try {
            c.cutoff = cut->get<int>();
        } catch (const json::exception& e) {
            throw UsageError(std::string("simulate.cutoff: ") + e.what());
        }
    }
    f.read("max_cutoff", c.max_cutoff);
    if (const auto* init = f.child("initial")) {
        if (!init->is_array()) throw UsageError("simulate.initial must be an array");
        for (const auto& m : *init) c.initial.push_back(mode_from_json(m));
    }
    f.read("divergence_guard", c.divergence_guard);
    f.read("leakage_tolerance", c.leakage_tolerance);
    f.read("sample_segments", c.sample_segments);
    f.read("epsilon", c.epsilon);
    f.finish();
    return c;
}

EstimateInputs estimate_inputs_from_json(const json& j) {
    EstimateInputs in;
    FieldReader f(j, "estimate");
    f.read("eta", in.eta);
    f.read("chi2", in.chi2);
    f.read("omega_a", in.omega_a);
    f.read("omega_b", in.omega_b);
    f.read("pump_intensity", in.pump_intensity);
    f.read("length", in.length);
    f.finish();
    return in;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
}

} // namespace zeno::cli
