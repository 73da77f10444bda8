#pragma once

// Gaussian-state simulator for one or two bosonic modes.
//
// Conventions (hbar = 1):
//   x = (a + a^dag) / sqrt(2),  p = -i (a - a^dag) / sqrt(2)
// Quadratures are ordered (x1, p1[, x2, p2]); the symplectic form is the
// direct sum of [[0, 1], [-1, 0]] blocks. Covariances are symmetrized
// second moments, so the vacuum has covariance I / 2.

#include "zeno/floquet.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace zeno::gaussian {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per-mode preparation: squeezed vacuum S(r e^{i phi}) followed by a
/// displacement D(alpha). All zero gives the vacuum.
struct ModePreparation {
    std::complex<double> alpha{0.0, 0.0};
    double squeeze_r = 0.0;
    double squeeze_phi = 0.0;
};

class GaussianState {
public:
    /// Validates symmetry (1e-12) and the uncertainty relation (symplectic
    /// eigenvalues >= 1/2 - 1e-10); throws InvalidState otherwise.
    GaussianState(Vector mean, Matrix covariance);

    static GaussianState vacuum(int mode_count);
    static GaussianState prepare(std::span<const ModePreparation> modes);

    int mode_count() const noexcept { return static_cast<int>(mean_.size() / 2); }
    const Vector& mean() const noexcept { return mean_; }
    const Matrix& covariance() const noexcept { return covariance_; }

    /// Smallest symplectic eigenvalue of the covariance.
    double min_symplectic_eigenvalue() const;

private:
    struct Unchecked {};
    GaussianState(Vector mean, Matrix covariance, Unchecked) noexcept
        : mean_(std::move(mean)), covariance_(std::move(covariance)) {}

    Vector mean_;
    Matrix covariance_;

    friend class SymplecticMap;
};

class SymplecticMap {
public:
    /// Throws InconsistentMatrix unless S J S^T = J within 1e-10 (relative to
    /// the squared norm of S for strongly squeezing maps).
    explicit SymplecticMap(Matrix matrix);

    static SymplecticMap identity(int mode_count);

    const Matrix& matrix() const noexcept { return matrix_; }
    int mode_count() const noexcept { return static_cast<int>(matrix_.rows() / 2); }

    /// max |S J S^T - J|
    double symplectic_defect() const;

    GaussianState apply(const GaussianState& state) const;

    friend SymplecticMap operator*(const SymplecticMap& l, const SymplecticMap& r);

private:
    Matrix matrix_;
};

/// Standard antisymmetric form for the (x1, p1, x2, p2, ...) ordering.
Matrix symplectic_form(int mode_count);

/// Orthogonal change of basis (x_a, p_a, x_b, p_b) -> (x+, p+, x-, p-) with
/// x+- = (x_a -+ x_b) / sqrt(2) and likewise for p.
const Eigen::Matrix4d& pm_basis();
Eigen::Vector4d to_pm_basis(const Eigen::Vector4d& mode_quadratures);
Eigen::Vector4d from_pm_basis(const Eigen::Vector4d& pm_quadratures);
Eigen::Matrix4d covariance_to_pm_basis(const Eigen::Matrix4d& covariance);
Eigen::Matrix4d covariance_from_pm_basis(const Eigen::Matrix4d& covariance);

/// Block transfer matrices of the decoupled (x+, p+) and (x-, p-) pairs over
/// one full period of the two-mode drive Gamma(a^dag b^dag + ab) then
/// Omega(a^dag b + a b^dag).
struct PlusMinusBlocks {
    floquet::TransferMatrix2 plus;
    floquet::TransferMatrix2 minus;
};
PlusMinusBlocks two_mode_period_blocks(const floquet::DriveSchedule& schedule);

enum class Segment { Unstable, Stable };

SymplecticMap two_mode_segment_symplectic(const floquet::DriveSchedule& schedule, Segment segment);
SymplecticMap two_mode_period_symplectic(const floquet::DriveSchedule& schedule);

SymplecticMap single_mode_segment_symplectic(const floquet::DriveSchedule& schedule, Segment segment);
/// A_s(omega tau2) * A_u(-gamma tau1) for (Gamma/2)(a^dag^2 + a^2) then
/// (Omega/2)(a^dag a + a a^dag).
SymplecticMap single_mode_period_symplectic(const floquet::DriveSchedule& schedule);

SymplecticMap period_symplectic(const floquet::DriveSchedule& schedule, int mode_count);

struct PhotonNumbers {
    std::vector<double> per_mode;
    double total = 0.0;
};

PhotonNumbers photon_numbers(const GaussianState& state);

inline constexpr double kDefaultDivergenceGuard = 1e12;

struct EvolveOptions {
    /// Also record the state right after the squeezing segment of each period.
    bool sample_segments = false;
    /// Abort once the total photon number exceeds this value.
    double divergence_guard = kDefaultDivergenceGuard;
};

enum class TrajectoryStatus { Completed, Diverged };

struct Trajectory {
    std::vector<GaussianState> states;
    /// Time of each recorded state.
    std::vector<double> times;
    TrajectoryStatus status = TrajectoryStatus::Completed;
};

/// States at t = nT for n = 0..periods (plus t = nT + tau1 when sampling
/// segments). Stops early with status Diverged when the guard trips.
Trajectory evolve(const GaussianState& state, const floquet::DriveSchedule& schedule,
                  const EvolveOptions& options = {});

/// Photon-number summary of a long run without storing the states.
struct PhotonSummary {
    double max_total = 0.0;
    double final_total = 0.0;
    std::uint64_t periods_completed = 0;
    TrajectoryStatus status = TrajectoryStatus::Completed;
};

PhotonSummary photon_summary(const GaussianState& state, const floquet::DriveSchedule& schedule,
                             double divergence_guard = kDefaultDivergenceGuard);

/// Upper bound on the total photon number reachable from `state` under a
/// strictly stable schedule, from the eigenvector condition number of the
/// period map. Empty for schedules that are not strictly stable.
std::optional<double> stable_photon_bound(const GaussianState& state, const floquet::DriveSchedule& schedule);

} // namespace zeno::gaussian
