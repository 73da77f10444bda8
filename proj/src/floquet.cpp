#include "zeno/floquet.hpp"

#include "zeno/errors.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace zeno::floquet {

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw InvalidParameter(std::string(what) + " must be finite");
    }
}

void require_non_negative(double value, const char* what) {
    require_finite(value, what);
    if (value < 0.0) {
        throw InvalidParameter(std::string(what) + " must be non-negative");
    }
}

} // namespace

DriveSchedule::DriveSchedule(double gamma, double tau1, double omega, double tau2, std::uint64_t periods)
    : gamma_(gamma), tau1_(tau1), omega_(omega), tau2_(tau2), periods_(periods) {
    require_non_negative(gamma, "gamma");
    require_non_negative(tau1, "tau1");
    require_non_negative(omega, "omega");
    require_non_negative(tau2, "tau2");
    if (periods > 0 && !(tau1 + tau2 > 0.0)) {
        throw InvalidParameter("period tau1 + tau2 must be positive when periods > 0");
    }
}

DriveSchedule DriveSchedule::from_products(double gamma_tau1, double omega_tau2, std::uint64_t periods,
                                           double tau1, double tau2) {
    require_non_negative(gamma_tau1, "gamma*tau1");
    require_non_negative(omega_tau2, "omega*tau2");
    require_non_negative(tau1, "tau1");
    require_non_negative(tau2, "tau2");
    if ((gamma_tau1 > 0.0 && tau1 == 0.0) || (omega_tau2 > 0.0 && tau2 == 0.0)) {
        throw InvalidParameter("a non-zero segment product needs a non-zero duration");
    }
    const double gamma = tau1 > 0.0 ? gamma_tau1 / tau1 : 0.0;
    const double omega = tau2 > 0.0 ? omega_tau2 / tau2 : 0.0;
    return {gamma, tau1, omega, tau2, periods};
}

std::string_view to_string(Stability s) noexcept {
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Marginal: return "marginal";
    case Stability::Unstable: return "unstable";
    }
    return "unknown";
}

ClassicalPendulumParams::ClassicalPendulumParams(double k1, double k2, double tau)
    : k1_(k1), k2_(k2), tau_(tau) {
    require_finite(k1, "k1");
    require_finite(k2, "k2");
    require_non_negative(tau, "tau");
    if (!(k1 > k2 && k2 > 0.0)) {
        throw InvalidParameter("classical pendulum requires k1 > k2 > 0");
    }
}

TransferMatrix2 unstable_segment_matrix(double gamma, double tau1) {
    require_finite(gamma, "gamma");
    require_finite(tau1, "tau1");
    const double g = gamma * tau1;
    require_finite(g, "gamma*tau1");
    const double c = std::cosh(g);
    const double s = std::sinh(g);
    return {c, s, s, c};
}

TransferMatrix2 stable_segment_matrix(double omega, double tau2) {
    require_finite(omega, "omega");
    require_finite(tau2, "tau2");
    const double w = omega * tau2;
    require_finite(w, "omega*tau2");
    const double c = std::cos(w);
    const double s = std::sin(w);
    return {c, s, -s, c};
}

TransferMatrix2 monodromy(const DriveSchedule& schedule) {
    return stable_segment_matrix(schedule.omega(), schedule.tau2()) *
           unstable_segment_matrix(schedule.gamma(), schedule.tau1());
}

TransferMatrix2 minus_mode_monodromy(const DriveSchedule& schedule) {
    return stable_segment_matrix(-schedule.omega(), schedule.tau2()) *
           unstable_segment_matrix(-schedule.gamma(), schedule.tau1());
}

StabilityReport classify(const TransferMatrix2& monodromy, double period, double epsilon) {
    require_finite(period, "period");
    require_non_negative(epsilon, "epsilon");
    const auto& m = monodromy.entries();
    for (double v : m) {
        require_finite(v, "monodromy entry");
    }
    // Roundoff in ad - bc grows with the size of the individual products.
    const double scale = std::max(1.0, std::abs(m[0] * m[3]) + std::abs(m[1] * m[2]));
    if (std::abs(monodromy.determinant() - 1.0) > 1e-9 * scale) {
        throw InconsistentMatrix("monodromy determinant " + std::to_string(monodromy.determinant()) +
                                 " differs from 1");
    }

    StabilityReport report;
    report.period = period;
    report.half_trace = std::abs(monodromy.trace()) / 2.0;
    const double h = report.half_trace;
    if (h < 1.0 - epsilon) {
        report.classification = Stability::Stable;
    } else if (h > 1.0 + epsilon) {
        report.classification = Stability::Unstable;
        if (!(period > 0.0)) {
            throw InvalidParameter("an unstable map needs a positive period for its growth rate");
        }
        report.floquet_exponent = std::log(h + std::sqrt(h * h - 1.0)) / period;
    } else {
        report.classification = Stability::Marginal;
    }
    return report;
}

StabilityReport stability(const DriveSchedule& schedule, double epsilon) {
    return classify(monodromy(schedule), schedule.period(), epsilon);
}

bool small_tau_predicate(const DriveSchedule& schedule) {
    return schedule.omega_tau2() > schedule.gamma_tau1();
}

double small_tau_half_trace(const DriveSchedule& schedule) {
    const double g = schedule.gamma_tau1();
    const double w = schedule.omega_tau2();
    return 1.0 - (w * w - g * g) / 2.0;
}

std::vector<PhaseSpacePoint> propagate_plus_mode(const DriveSchedule& schedule, double x0, double p0) {
    require_finite(x0, "x0");
    require_finite(p0, "p0");
    const TransferMatrix2 a = monodromy(schedule);
    std::vector<PhaseSpacePoint> out;
    out.reserve(schedule.periods() + 1);
    PhaseSpacePoint v{x0, p0};
    out.push_back(v);
    for (std::uint64_t n = 0; n < schedule.periods(); ++n) {
        v = a.apply(v);
        out.push_back(v);
    }
    return out;
}

double stable_orbit_bound(const TransferMatrix2& monodromy) {
    const double h = monodromy.trace() / 2.0;
    if (!(std::abs(h) < 1.0)) {
        throw InvalidParameter("orbit bound requires a strictly stable map");
    }
    using cplx = std::complex<double>;
    const cplx lambda(h, std::sqrt(1.0 - h * h));
    const auto& m = monodromy.entries();
    // Two algebraically equivalent eigenvector choices; keep the better scaled one.
    std::array<cplx, 2> v1{cplx(m[1]), lambda - m[0]};
    std::array<cplx, 2> v2{lambda - m[3], cplx(m[2])};
    auto norm2 = [](const std::array<cplx, 2>& v) { return std::norm(v[0]) + std::norm(v[1]); };
    const auto& v = norm2(v1) >= norm2(v2) ? v1 : v2;
    // V = [v, conj(v)]; V^H V has eigenvalues |v|^2 +- |v0^2 + v1^2|.
    const double n2 = norm2(v);
    const double cross = std::abs(v[0] * v[0] + v[1] * v[1]);
    if (!(n2 > cross)) {
        throw NumericError("degenerate eigenvectors in orbit bound");
    }
    return std::sqrt((n2 + cross) / (n2 - cross));
}

ClassicalMap classical_pendulum_monodromy(const ClassicalPendulumParams& params, double epsilon) {
    const double k1 = params.k1();
    const double k2 = params.k2();
    const double tau = params.tau();
    const TransferMatrix2 a1{std::cosh(k1 * tau), std::sinh(k1 * tau) / k1, k1 * std::sinh(k1 * tau),
                             std::cosh(k1 * tau)};
    const TransferMatrix2 a2{std::cos(k2 * tau), std::sin(k2 * tau) / k2, -k2 * std::sin(k2 * tau),
                             std::cos(k2 * tau)};
    ClassicalMap out;
    out.matrix = a2 * a1;
    out.report = classify(out.matrix, 2.0 * tau, epsilon);
    return out;
}

} // namespace zeno::floquet
