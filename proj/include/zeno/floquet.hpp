#pragma once

// Two-segment switched drive: exact segment transfer matrices, the
// one-period monodromy and its trace-based stability classification.
//
// Quadrature pairs (x, p) evolve through a squeezing segment
//   A_u = [[cosh g, sinh g], [sinh g, cosh g]],  g = gamma * tau1
// followed by a rotation segment
//   A_s = [[cos w, sin w], [-sin w, cos w]],      w = omega * tau2
// so one full period is A = A_s * A_u and |Tr A| / 2 = |cos w cosh g|.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace zeno::floquet {

inline constexpr double kDefaultMarginalTolerance = 1e-9;

class DriveSchedule {
public:
    /// Throws InvalidParameter unless all rates and durations are finite and
    /// non-negative, and tau1 + tau2 > 0 whenever periods > 0.
    DriveSchedule(double gamma, double tau1, double omega, double tau2, std::uint64_t periods);

    /// Schedule with the given dimensionless segment products. The durations
    /// are fixed to tau1, tau2 and the rates chosen to match.
    static DriveSchedule from_products(double gamma_tau1, double omega_tau2, std::uint64_t periods,
                                       double tau1 = 0.5, double tau2 = 0.5);

    double gamma() const noexcept { return gamma_; }
    double tau1() const noexcept { return tau1_; }
    double omega() const noexcept { return omega_; }
    double tau2() const noexcept { return tau2_; }
    std::uint64_t periods() const noexcept { return periods_; }

    double period() const noexcept { return tau1_ + tau2_; }
    double gamma_tau1() const noexcept { return gamma_ * tau1_; }
    double omega_tau2() const noexcept { return omega_ * tau2_; }

private:
    double gamma_;
    double tau1_;
    double omega_;
    double tau2_;
    std::uint64_t periods_;
};

struct PhaseSpacePoint {
    double x = 0.0;
    double p = 0.0;
};

/// Real 2x2 matrix acting on an (x, p) pair, stored row-major.
class TransferMatrix2 {
public:
    constexpr TransferMatrix2() noexcept : m_{1.0, 0.0, 0.0, 1.0} {}
    constexpr TransferMatrix2(double m00, double m01, double m10, double m11) noexcept
        : m_{m00, m01, m10, m11} {}

    static constexpr TransferMatrix2 identity() noexcept { return {}; }

    constexpr double operator()(int row, int col) const noexcept { return m_[2 * row + col]; }
    constexpr const std::array<double, 4>& entries() const noexcept { return m_; }

    constexpr double trace() const noexcept { return m_[0] + m_[3]; }
    constexpr double determinant() const noexcept { return m_[0] * m_[3] - m_[1] * m_[2]; }

    /// Inverse of a unit-determinant matrix.
    constexpr TransferMatrix2 symplectic_inverse() const noexcept {
        return {m_[3], -m_[1], -m_[2], m_[0]};
    }

    constexpr PhaseSpacePoint apply(PhaseSpacePoint v) const noexcept {
        return {m_[0] * v.x + m_[1] * v.p, m_[2] * v.x + m_[3] * v.p};
    }

    friend constexpr TransferMatrix2 operator*(const TransferMatrix2& l, const TransferMatrix2& r) noexcept {
        return {l.m_[0] * r.m_[0] + l.m_[1] * r.m_[2], l.m_[0] * r.m_[1] + l.m_[1] * r.m_[3],
                l.m_[2] * r.m_[0] + l.m_[3] * r.m_[2], l.m_[2] * r.m_[1] + l.m_[3] * r.m_[3]};
    }

private:
    std::array<double, 4> m_;
};

enum class Stability { Stable, Marginal, Unstable };

std::string_view to_string(Stability s) noexcept;

struct StabilityReport {
    double half_trace = 1.0;
    Stability classification = Stability::Marginal;
    /// ln(lambda_max) / period for unstable maps, exactly 0 otherwise.
    double floquet_exponent = 0.0;
    double period = 0.0;
};

class ClassicalPendulumParams {
public:
    /// Throws InvalidParameter unless k1 > k2 > 0 and tau >= 0, all finite.
    ClassicalPendulumParams(double k1, double k2, double tau);

    double k1() const noexcept { return k1_; }
    double k2() const noexcept { return k2_; }
    double tau() const noexcept { return tau_; }

private:
    double k1_;
    double k2_;
    double tau_;
};

struct ClassicalMap {
    TransferMatrix2 matrix;
    StabilityReport report;
};

/// Squeezing-segment flow. Negative rates give the time-reversed segment.
TransferMatrix2 unstable_segment_matrix(double gamma, double tau1);
/// Rotation-segment flow. Negative rates rotate the other way.
TransferMatrix2 stable_segment_matrix(double omega, double tau2);

/// A = A_s * A_u for the (x+, p+) pair.
TransferMatrix2 monodromy(const DriveSchedule& schedule);
/// A_s(-omega tau2) * A_u(-gamma tau1), the time-reversed partner.
TransferMatrix2 minus_mode_monodromy(const DriveSchedule& schedule);

/// Throws InconsistentMatrix when det deviates from 1 by more than
/// 1e-9 (scaled by the size of the determinant's terms).
StabilityReport classify(const TransferMatrix2& monodromy, double period,
                         double epsilon = kDefaultMarginalTolerance);

/// classify(monodromy(schedule), schedule.period(), epsilon)
StabilityReport stability(const DriveSchedule& schedule, double epsilon = kDefaultMarginalTolerance);

/// Leading-order small-period predicate: omega tau2 > gamma tau1.
bool small_tau_predicate(const DriveSchedule& schedule);

/// 1 - (w^2 - g^2) / 2, the quadratic truncation of the half trace.
double small_tau_half_trace(const DriveSchedule& schedule);

/// A^n (x0, p0) for n = 0..periods.
std::vector<PhaseSpacePoint> propagate_plus_mode(const DriveSchedule& schedule, double x0, double p0);

/// Condition number of the eigenvector matrix of a stable (|Tr|/2 < 1)
/// unit-determinant map, so that |A^n v| <= bound * |v| for every n.
/// Throws InvalidParameter for maps that are not strictly stable.
double stable_orbit_bound(const TransferMatrix2& monodromy);

ClassicalMap classical_pendulum_monodromy(const ClassicalPendulumParams& params,
                                          double epsilon = kDefaultMarginalTolerance);

} // namespace zeno::floquet
