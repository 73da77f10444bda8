#include "doctest.h"

#include "zeno/cli/commands.hpp"
#include "zeno/gaussian.hpp"
#include "zeno/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace zeno::cli;

namespace {

// acosh(1 / cos 1), evaluated independently.
constexpr double kVerticalCrossing = 1.226191170883517;
// sqrt(220^3 / 2 * (2e-23)^2 * (3e15)^2 * 1e5), 30-digit evaluation.
constexpr double kGammaC = 0.04377944723269128;

std::string render(const CommandResult& r, Format f = Format::Csv) {
    std::ostringstream out;
    write(out, f, r.meta, r.table);
    return out.str();
}

std::size_t column(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (t.columns[i] == name) return i;
    }
    FAIL("missing column " << name);
    return 0;
}

double num(const Cell& c) { return std::get<double>(c); }
std::string str(const Cell& c) { return std::get<std::string>(c); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + ZENO_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string temp_path(const std::string& name) { return "zeno_test_" + name; }

} // namespace

TEST_CASE("estimate reproduces the independent evaluation") {
    const auto e = estimate_coupling({});
    CHECK(e.gamma_c == doctest::Approx(kGammaC).epsilon(1e-14));
    CHECK(e.gamma_tau1 == doctest::Approx(kGammaC * 1e-2).epsilon(1e-14));

    EstimateInputs doubled;
    doubled.pump_intensity *= 2.0;
    CHECK(estimate_coupling(doubled).gamma_c / e.gamma_c == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const auto r = run_estimate({});
    REQUIRE(r.table.rows.size() == 1);
    CHECK(num(r.table.rows[0][column(r.table, "gamma_c")]) == e.gamma_c);
}

TEST_CASE("estimate rejects non-positive or non-finite inputs") {
    for (double bad : {0.0, -1.0, double(INFINITY), double(NAN)}) {
        EstimateInputs in;
        in.chi2 = bad;
        CHECK_THROWS_AS(estimate_coupling(in), UsageError);
        in = {};
        in.length = bad;
        CHECK_THROWS_AS(validate(in), UsageError);
    }
}

TEST_CASE("range values include both ends") {
    const Range r{0.0, 1.5, 151};
    const auto v = r.values();
    REQUIRE(v.size() == 151);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 1.5);
    CHECK(v[100] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sweep config validation") {
    SweepConfig ok;
    CHECK_NOTHROW(validate(ok));
    auto broken = [&](auto mutate) {
        SweepConfig c;
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.gamma_tau1.steps = 1; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.omega_tau2.min = c.omega_tau2.max; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.gamma_tau1.min = -0.1; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.gamma_tau1.max = INFINITY; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.omega_tau2.min = NAN; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.epsilon = -1e-9; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SweepConfig& c) { c.tau1 = 0.0; })), UsageError);
}

TEST_CASE("simulate config validation") {
    auto broken = [](auto mutate) {
        SimulateConfig c;
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(validate(SimulateConfig{}));
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) { c.modes = 3; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) { c.gamma = -1.0; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) { c.tau1 = c.tau2 = 0.0; })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) { c.initial.resize(1); })), UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) {
                        c.initial.resize(2);
                        c.initial[0].number = 1;
                    })),
                    UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) {
                        c.backend = Backend::Both;
                        c.initial.resize(2);
                        c.initial[0].alpha = {0.3, 0.0};
                        c.initial[0].squeeze_r = 0.2;
                    })),
                    UsageError);
    CHECK_THROWS_AS(validate(broken([](SimulateConfig& c) {
                        c.backend = Backend::Fock;
                        c.sample_segments = true;
                    })),
                    UsageError);
    CHECK_NOTHROW(validate(broken([](SimulateConfig& c) {
        c.backend = Backend::Fock;
        c.initial.resize(2);
        c.initial[1].number = 2;
    })));
}

TEST_CASE("configs round-trip through JSON and reject unknown keys") {
    SweepConfig s;
    s.gamma_tau1 = {0.1, 0.9, 7};
    s.cross_check.enabled = true;
    s.cross_check.periods = 123;
    CHECK(to_json(sweep_config_from_json(to_json(s))) == to_json(s));

    SimulateConfig m;
    m.backend = Backend::Both;
    m.cutoff = 30;
    m.initial = {ModeSpec{0, {0.25, -0.5}, 0.0, 0.0}, ModeSpec{0, {0.0, 0.0}, 0.3, 1.1}};
    CHECK(to_json(simulate_config_from_json(to_json(m))) == to_json(m));

    EstimateInputs e;
    e.length = 0.02;
    CHECK(to_json(estimate_inputs_from_json(to_json(e))) == to_json(e));

    CHECK_THROWS_AS(sweep_config_from_json({{"gamma_tau_1", {{"min", 0}}}}), UsageError);
    CHECK_THROWS_AS(sweep_config_from_json({{"gamma_tau1", {{"stepz", 3}}}}), UsageError);
    CHECK_THROWS_AS(simulate_config_from_json({{"backend", "dense"}}), UsageError);
    CHECK_THROWS_AS(simulate_config_from_json({{"periods", "ten"}}), UsageError);
    CHECK_THROWS_AS(estimate_inputs_from_json(nlohmann::json::array()), UsageError);

    // Missing keys keep their defaults.
    const auto partial = sweep_config_from_json({{"epsilon", 1e-6}});
    CHECK(partial.epsilon == 1e-6);
    CHECK(partial.gamma_tau1.steps == 151);
}

TEST_CASE("number formatting is exact and locale free") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(std::strtod(format_double(std::numbers::pi).c_str(), nullptr) == std::numbers::pi);
}

TEST_CASE("csv and json layout") {
    const auto r = run_estimate({});
    const std::string csv = render(r);
    CHECK(csv.find('\r') == std::string::npos);
    std::istringstream lines(csv);
    std::string l1, l2, header, row, extra;
    std::getline(lines, l1);
    std::getline(lines, l2);
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(l1.rfind("# tool=zeno version=", 0) == 0);
    CHECK(l2 == "# command=estimate config_hash=" + r.meta.config_hash);
    CHECK(header == "eta,chi2,omega_a,omega_b,pump_intensity,length,gamma_c,gamma_tau1");
    CHECK_FALSE(row.empty());
    CHECK_FALSE(std::getline(lines, extra));

    const auto doc = nlohmann::json::parse(render(r, Format::Json));
    CHECK(doc["meta"]["config_hash"] == r.meta.config_hash);
    CHECK(doc["meta"]["version"] == zeno::kVersion);
    REQUIRE(doc["rows"].size() == 1);
    CHECK(doc["rows"][0]["gamma_c"].get<double>() == estimate_coupling({}).gamma_c);

    CHECK(r.meta.config_hash.size() == 16);
    EstimateInputs other;
    other.eta = 221.0;
    CHECK(run_estimate(other).meta.config_hash != r.meta.config_hash);
    CHECK_THROWS_AS(format_from_string("xml"), UsageError);
}

TEST_CASE("sweep examples") {
    SweepConfig c;
    c.gamma_tau1 = {0.0, 1.5, 31};
    c.omega_tau2 = {0.0, std::numbers::pi, 31};
    const auto points = sweep(c, 2);
    REQUIRE(points.size() == 31 * 31);
    for (const auto& p : points) {
        if (p.gamma_tau1 == 0.0) CHECK(p.report.classification != zeno::floquet::Stability::Unstable);
    }

    SweepConfig one;
    one.gamma_tau1 = {0.5, 0.6, 2};
    one.omega_tau2 = {0.1, 0.2, 2};
    CHECK(sweep(one, 1).front().report.classification == zeno::floquet::Stability::Unstable);
}

TEST_CASE("vertical line at omega tau2 = 1 changes class at acosh(1/cos 1)") {
    SweepConfig c;
    c.gamma_tau1 = {0.0, 1.5, 301};
    c.omega_tau2 = {1.0, 1.0 + 1e-9, 2};
    for (const auto& p : sweep(c, 3)) {
        if (p.omega_tau2 != 1.0) continue;
        const bool stable = p.report.classification == zeno::floquet::Stability::Stable;
        CHECK_MESSAGE(stable == (p.gamma_tau1 < kVerticalCrossing), "gamma_tau1 = " << p.gamma_tau1);
    }
    CHECK(std::cosh(kVerticalCrossing) * std::cos(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sweep output does not depend on worker count or repetition") {
    SweepConfig c;
    c.gamma_tau1.steps = 41;
    c.omega_tau2.steps = 37;
    const auto a = render(run_sweep(c, 1));
    CHECK(a == render(run_sweep(c, 4)));
    CHECK(a == render(run_sweep(c, 7)));
    CHECK(render(run_sweep(c, 4), Format::Json) == render(run_sweep(c, 2), Format::Json));
}

TEST_CASE("sweep rows follow gamma-major grid order") {
    SweepConfig c;
    c.gamma_tau1 = {0.0, 1.0, 3};
    c.omega_tau2 = {0.0, 2.0, 5};
    const auto r = run_sweep(c, 3);
    REQUIRE(r.table.rows.size() == 15);
    CHECK(r.table.columns ==
          std::vector<std::string>{"gamma_tau1", "omega_tau2", "half_trace", "classification", "floquet_exponent"});
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(num(r.table.rows[i][0]) == c.gamma_tau1.values()[i / 5]);
        CHECK(num(r.table.rows[i][1]) == c.omega_tau2.values()[i % 5]);
    }
}

TEST_CASE("cross-check agrees with the classification on the default grid") {
    SweepConfig c;
    c.cross_check.enabled = true;
    const auto r = run_sweep(c, sweep_threads());
    REQUIRE(r.table.rows.size() == 151 * 151);
    const auto cls = column(r.table, "classification");
    const auto cross = column(r.table, "cross_check");
    const auto flag = column(r.table, "disagreement");
    const auto half = column(r.table, "half_trace");
    std::size_t contradictions = 0;
    for (const auto& row : r.table.rows) {
        if (std::abs(num(row[half]) - 1.0) <= c.cross_check.marginal_band) continue;
        const bool bounded = str(row[cross]) == "bounded";
        if (bounded != (str(row[cls]) != "unstable")) ++contradictions;
        CHECK(std::get<std::int64_t>(row[flag]) == 0);
    }
    CHECK(contradictions == 0);
    CHECK(r.message.empty());
}

TEST_CASE("simulate: Gamma = 0 leaves the vacuum untouched") {
    SimulateConfig c;
    c.omega = 1.7;
    c.periods = 25;
    c.backend = Backend::Both;
    const auto rec = simulate(c);
    REQUIRE(rec.rows.size() == 26);
    for (const auto& row : rec.rows) {
        for (double n : *row.gaussian_n) CHECK(n == 0.0);
        for (double n : *row.fock_n) CHECK(std::abs(n) < 1e-15);
    }
}

TEST_CASE("simulate: Omega = 0 follows sinh^2") {
    SimulateConfig c;
    c.gamma = 0.2; // gamma * tau1 = 0.1
    c.periods = 10;
    c.backend = Backend::Both;
    c.cutoff = 40;
    const auto rec = simulate(c);
    REQUIRE(rec.rows.size() == 11);
    for (const auto& row : rec.rows) {
        const double sh = std::sinh(0.1 * static_cast<double>(row.period));
        const double expected = sh * sh;
        const double scale = std::max(expected, 1e-300);
        CHECK(std::abs((*row.gaussian_n)[0] - expected) <= 1e-9 * scale);
        CHECK(std::abs((*row.fock_n)[0] - expected) <= 1e-7 * scale);
        CHECK(*row.discrepancy < 1e-9);
        CHECK(row.status == "ok");
    }
}

TEST_CASE("simulate: stable point stays bounded over 1000 periods") {
    SimulateConfig c;
    c.gamma = 0.2;  // 0.1
    c.omega = 2.0;  // 1.0
    c.periods = 1000;
    const auto r = run_simulate(c);
    REQUIRE(r.table.rows.size() == 1001);
    CHECK(r.exit_code == kExitOk);
    const auto total = column(r.table, "n_total");
    double max_total = 0.0;
    double min_after_start = INFINITY;
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
        const double n = num(r.table.rows[i][total]);
        max_total = std::max(max_total, n);
        if (i > 0) min_after_start = std::min(min_after_start, n);
    }
    const auto bound = zeno::gaussian::stable_photon_bound(
        zeno::gaussian::GaussianState::vacuum(2), zeno::floquet::DriveSchedule(0.2, 0.5, 2.0, 0.5, 1000));
    REQUIRE(bound);
    CHECK(max_total <= *bound);
    CHECK(max_total > min_after_start); // oscillates rather than settling
    CHECK(str(r.table.rows.back()[column(r.table, "classification")]) == "stable");
}

TEST_CASE("simulate: single-mode columns and segment sampling") {
    SimulateConfig c;
    c.modes = 1;
    c.gamma = 0.4;
    c.omega = 1.0;
    c.periods = 4;
    c.sample_segments = true;
    const auto r = run_simulate(c);
    CHECK(r.table.columns == std::vector<std::string>{"period", "time", "n_a", "n_total", "half_trace",
                                                      "classification", "status"});
    REQUIRE(r.table.rows.size() == 9);
    CHECK(num(r.table.rows[1][1]) == 0.5);
    CHECK(std::get<std::int64_t>(r.table.rows[1][0]) == 1);
    CHECK(std::get<std::int64_t>(r.table.rows[2][0]) == 1);
}

TEST_CASE("simulate: guard trips give partial, marked output") {
    SimulateConfig fock;
    fock.gamma = 4.0;
    fock.periods = 20;
    fock.backend = Backend::Fock;
    fock.cutoff = 20;
    const auto r = run_simulate(fock);
    CHECK(r.exit_code == kExitGuard);
    CHECK(r.table.rows.size() < 21);
    CHECK(str(r.table.rows.back()[column(r.table, "status")]) == "truncation_unsafe");
    CHECK_FALSE(r.message.empty());

    SimulateConfig gauss;
    gauss.gamma = 4.0;
    gauss.periods = 100;
    const auto g = run_simulate(gauss);
    CHECK(g.exit_code == kExitGuard);
    CHECK(str(g.table.rows.back()[column(g.table, "status")]) == "diverged");
    CHECK(num(g.table.rows.back()[column(g.table, "n_total")]) > gauss.divergence_guard);
}

TEST_CASE("simulate: both backends agree from coherent and squeezed inputs") {
    SimulateConfig c;
    c.gamma = 0.2;
    c.omega = 1.3;
    c.periods = 15;
    c.backend = Backend::Both;
    c.cutoff = 40;
    c.initial = {ModeSpec{0, {0.4, 0.2}, 0.0, 0.0}, ModeSpec{0, {0.0, 0.0}, 0.2, 0.7}};
    const auto rec = simulate(c);
    REQUIRE(rec.rows.size() == 16);
    for (const auto& row : rec.rows) CHECK(*row.discrepancy < 1e-8);
}

TEST_CASE("cli binary: exit codes and byte-identical files") {
    CHECK(run_cli("estimate") == kExitOk);
    CHECK(run_cli("sweep --gamma-min 1 --gamma-max 0.5") == kExitUsage);
    CHECK(run_cli("sweep --gamma-steps 1") == kExitUsage);
    CHECK(run_cli("sweep --format xml") == kExitUsage);
    CHECK(run_cli("estimate --eta -3") == kExitUsage);
    CHECK(run_cli("simulate --config /nonexistent/zeno.json") == kExitUsage);
    CHECK(run_cli("simulate --backend fock --initial '[{\"n\":30},{}]' --cutoff 10") == kExitUsage);
    CHECK(run_cli("frobnicate") == kExitUsage);
    CHECK(run_cli("simulate --gamma 4 --periods 20 --backend fock --cutoff 20") == kExitGuard);

    const auto cfg = temp_path("sweep.json");
    {
        std::ofstream out(cfg);
        out << R"({"gamma_tau1": {"min": 0, "max": 1.5, "steps": 21}, "omega_tau2": {"steps": 17}})";
    }
    const auto a = temp_path("a.csv");
    const auto b = temp_path("b.csv");
    REQUIRE(run_cli("sweep --config " + cfg + " --out " + a) == kExitOk);
    REQUIRE(run_cli("sweep --config " + cfg + " --out " + b) == kExitOk);
    const auto text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(std::count(text.begin(), text.end(), '\n') == 3 + 21 * 17);

    {
        std::ofstream out(cfg);
        out << R"({"gamma_tau1": {"min": 0, "max": 1.5, "steps": 21}, "bogus": 1})";
    }
    CHECK(run_cli("sweep --config " + cfg) == kExitUsage);
    for (const auto& p : {cfg, a, b}) std::remove(p.c_str());
}
