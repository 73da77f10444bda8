#include "zeno/gaussian.hpp"

#include "zeno/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

namespace zeno::gaussian {

using floquet::DriveSchedule;
using floquet::TransferMatrix2;

namespace {

void require_mode_count(int mode_count) {
    if (mode_count != 1 && mode_count != 2) {
        throw InvalidState("mode count must be 1 or 2, got " + std::to_string(mode_count));
    }
}

double symplectic_spectrum_min(const Matrix& covariance) {
    const Matrix jc = symplectic_form(static_cast<int>(covariance.rows() / 2)) * covariance;
    Eigen::EigenSolver<Matrix> solver(jc, false);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symplectic spectrum: eigenvalue solver failed");
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        lowest = std::min(lowest, std::abs(solver.eigenvalues()[i].imag()));
    }
    return lowest;
}

Matrix to_matrix(const TransferMatrix2& m) {
    Matrix out(2, 2);
    out << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return out;
}

SymplecticMap from_pm_blocks(const TransferMatrix2& plus, const TransferMatrix2& minus) {
    // Q^T diag(P, M) Q = [[P + M, M - P], [M - P, P + M]] / 2, written out so
    // that equal blocks come back exactly.
    Eigen::Matrix4d out;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double sum = 0.5 * (plus(r, c) + minus(r, c));
            const double diff = 0.5 * (minus(r, c) - plus(r, c));
            out(r, c) = out(r + 2, c + 2) = sum;
            out(r, c + 2) = out(r + 2, c) = diff;
        }
    }
    return SymplecticMap(Matrix(out));
}

// Segment flows of the decoupled pairs. Under Gamma(a^dag b^dag + ab) the
// pair (x+, p+) obeys x' = Gamma p, p' = Gamma x and (x-, p-) the reverse.
// Under Omega(a^dag b + a b^dag), (x-, p-) rotates as x' = Omega p,
// p' = -Omega x and (x+, p+) the reverse.
PlusMinusBlocks segment_blocks(const DriveSchedule& s, Segment segment) {
    if (segment == Segment::Unstable) {
        return {floquet::unstable_segment_matrix(s.gamma(), s.tau1()),
                floquet::unstable_segment_matrix(-s.gamma(), s.tau1())};
    }
    return {floquet::stable_segment_matrix(-s.omega(), s.tau2()),
            floquet::stable_segment_matrix(s.omega(), s.tau2())};
}

} // namespace

// ---------------------------------------------------------------------------
// GaussianState

GaussianState::GaussianState(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto dim = mean_.size();
    if (dim != 2 && dim != 4) {
        throw InvalidState("mean must have 2 or 4 entries");
    }
    if (covariance_.rows() != dim || covariance_.cols() != dim) {
        throw InvalidState("covariance dimension does not match the mean");
    }
    if (!mean_.allFinite() || !covariance_.allFinite()) {
        throw InvalidState("state contains non-finite entries");
    }
    const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidState("covariance is not symmetric");
    }
    const double nu = symplectic_spectrum_min(covariance_);
    if (nu < 0.5 - 1e-10 * scale) {
        throw InvalidState("covariance violates the uncertainty relation (symplectic eigenvalue " +
                           std::to_string(nu) + ")");
    }
}

GaussianState GaussianState::vacuum(int mode_count) {
    require_mode_count(mode_count);
    const int dim = 2 * mode_count;
    return {Vector::Zero(dim), 0.5 * Matrix::Identity(dim, dim)};
}

GaussianState GaussianState::prepare(std::span<const ModePreparation> modes) {
    require_mode_count(static_cast<int>(modes.size()));
    const auto dim = static_cast<Eigen::Index>(2 * modes.size());
    Vector mean = Vector::Zero(dim);
    Matrix cov = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto& m = modes[i];
        if (!std::isfinite(m.alpha.real()) || !std::isfinite(m.alpha.imag()) || !std::isfinite(m.squeeze_r) ||
            !std::isfinite(m.squeeze_phi) || m.squeeze_r < 0.0) {
            throw InvalidState("mode preparation needs finite alpha, phi and r >= 0");
        }
        const auto o = static_cast<Eigen::Index>(2 * i);
        mean(o) = std::numbers::sqrt2 * m.alpha.real();
        mean(o + 1) = std::numbers::sqrt2 * m.alpha.imag();
        const double ch = std::cosh(2.0 * m.squeeze_r);
        const double sh = std::sinh(2.0 * m.squeeze_r);
        cov(o, o) = 0.5 * (ch - sh * std::cos(m.squeeze_phi));
        cov(o + 1, o + 1) = 0.5 * (ch + sh * std::cos(m.squeeze_phi));
        cov(o, o + 1) = cov(o + 1, o) = -0.5 * sh * std::sin(m.squeeze_phi);
    }
    return {std::move(mean), std::move(cov)};
}

double GaussianState::min_symplectic_eigenvalue() const { return symplectic_spectrum_min(covariance_); }

// ---------------------------------------------------------------------------
// SymplecticMap

SymplecticMap::SymplecticMap(Matrix matrix) : matrix_(std::move(matrix)) {
    const auto dim = matrix_.rows();
    if ((dim != 2 && dim != 4) || matrix_.cols() != dim) {
        throw InconsistentMatrix("symplectic map must be 2x2 or 4x4");
    }
    if (!matrix_.allFinite()) {
        throw InconsistentMatrix("symplectic map has non-finite entries");
    }
    const double scale = std::max(1.0, matrix_.squaredNorm());
    if (symplectic_defect() > 1e-10 * scale) {
        throw InconsistentMatrix("matrix does not preserve the symplectic form");
    }
}

SymplecticMap SymplecticMap::identity(int mode_count) {
    require_mode_count(mode_count);
    return SymplecticMap(Matrix::Identity(2 * mode_count, 2 * mode_count));
}

double SymplecticMap::symplectic_defect() const {
    const Matrix j = symplectic_form(mode_count());
    return (matrix_ * j * matrix_.transpose() - j).cwiseAbs().maxCoeff();
}

GaussianState SymplecticMap::apply(const GaussianState& state) const {
    if (state.mode_count() != mode_count()) {
        throw InvalidState("state and map mode counts differ");
    }
    Matrix cov = matrix_ * state.covariance() * matrix_.transpose();
    // Keep exact symmetry so long runs do not accumulate a skew part.
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {matrix_ * state.mean(), std::move(cov), GaussianState::Unchecked{}};
}

SymplecticMap operator*(const SymplecticMap& l, const SymplecticMap& r) {
    if (l.mode_count() != r.mode_count()) {
        throw InconsistentMatrix("cannot compose maps of different mode counts");
    }
    return SymplecticMap(l.matrix_ * r.matrix_);
}

Matrix symplectic_form(int mode_count) {
    require_mode_count(mode_count);
    Matrix j = Matrix::Zero(2 * mode_count, 2 * mode_count);
    for (int i = 0; i < mode_count; ++i) {
        j(2 * i, 2 * i + 1) = 1.0;
        j(2 * i + 1, 2 * i) = -1.0;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Basis change

const Eigen::Matrix4d& pm_basis() {
    static const Eigen::Matrix4d q = [] {
        Eigen::Matrix4d m;
        m << 1, 0, -1, 0,
             0, 1, 0, -1,
             1, 0, 1, 0,
             0, 1, 0, 1;
        return Eigen::Matrix4d(m / std::numbers::sqrt2);
    }();
    return q;
}

Eigen::Vector4d to_pm_basis(const Eigen::Vector4d& mode_quadratures) { return pm_basis() * mode_quadratures; }

Eigen::Vector4d from_pm_basis(const Eigen::Vector4d& pm_quadratures) {
    return pm_basis().transpose() * pm_quadratures;
}

Eigen::Matrix4d covariance_to_pm_basis(const Eigen::Matrix4d& covariance) {
    return pm_basis() * covariance * pm_basis().transpose();
}

Eigen::Matrix4d covariance_from_pm_basis(const Eigen::Matrix4d& covariance) {
    return pm_basis().transpose() * covariance * pm_basis();
}

// ---------------------------------------------------------------------------
// Drive maps

PlusMinusBlocks two_mode_period_blocks(const DriveSchedule& schedule) {
    const auto u = segment_blocks(schedule, Segment::Unstable);
    const auto s = segment_blocks(schedule, Segment::Stable);
    return {s.plus * u.plus, s.minus * u.minus};
}

SymplecticMap two_mode_segment_symplectic(const DriveSchedule& schedule, Segment segment) {
    const auto b = segment_blocks(schedule, segment);
    return from_pm_blocks(b.plus, b.minus);
}

SymplecticMap two_mode_period_symplectic(const DriveSchedule& schedule) {
    const auto b = two_mode_period_blocks(schedule);
    return from_pm_blocks(b.plus, b.minus);
}

SymplecticMap single_mode_segment_symplectic(const DriveSchedule& schedule, Segment segment) {
    if (segment == Segment::Unstable) {
        return SymplecticMap(to_matrix(floquet::unstable_segment_matrix(-schedule.gamma(), schedule.tau1())));
    }
    return SymplecticMap(to_matrix(floquet::stable_segment_matrix(schedule.omega(), schedule.tau2())));
}

SymplecticMap single_mode_period_symplectic(const DriveSchedule& schedule) {
    return SymplecticMap(to_matrix(floquet::stable_segment_matrix(schedule.omega(), schedule.tau2()) *
                                   floquet::unstable_segment_matrix(-schedule.gamma(), schedule.tau1())));
}

SymplecticMap period_symplectic(const DriveSchedule& schedule, int mode_count) {
    require_mode_count(mode_count);
    return mode_count == 1 ? single_mode_period_symplectic(schedule) : two_mode_period_symplectic(schedule);
}

// ---------------------------------------------------------------------------
// Observables and evolution

PhotonNumbers photon_numbers(const GaussianState& state) {
    PhotonNumbers out;
    const auto& m = state.mean();
    const auto& c = state.covariance();
    for (int i = 0; i < state.mode_count(); ++i) {
        const int o = 2 * i;
        const double second = c(o, o) + c(o + 1, o + 1) + m(o) * m(o) + m(o + 1) * m(o + 1);
        out.per_mode.push_back((second - 1.0) / 2.0);
        out.total += out.per_mode.back();
    }
    return out;
}

Trajectory evolve(const GaussianState& state, const DriveSchedule& schedule, const EvolveOptions& options) {
    const int modes = state.mode_count();
    const SymplecticMap period_map = period_symplectic(schedule, modes);
    std::optional<SymplecticMap> squeeze_map;
    std::optional<SymplecticMap> rotate_map;
    if (options.sample_segments) {
        squeeze_map = modes == 1 ? single_mode_segment_symplectic(schedule, Segment::Unstable)
                                 : two_mode_segment_symplectic(schedule, Segment::Unstable);
        rotate_map = modes == 1 ? single_mode_segment_symplectic(schedule, Segment::Stable)
                                : two_mode_segment_symplectic(schedule, Segment::Stable);
    }

    Trajectory out;
    const std::size_t per_period = options.sample_segments ? 2 : 1;
    out.states.reserve(schedule.periods() * per_period + 1);
    out.states.push_back(state);
    out.times.push_back(0.0);

    auto diverged = [&](const GaussianState& s) {
        const double total = photon_numbers(s).total;
        return !std::isfinite(total) || total > options.divergence_guard;
    };

    for (std::uint64_t n = 0; n < schedule.periods(); ++n) {
        const double t0 = static_cast<double>(n) * schedule.period();
        if (options.sample_segments) {
            GaussianState mid = squeeze_map->apply(out.states.back());
            out.states.push_back(mid);
            out.times.push_back(t0 + schedule.tau1());
            if (diverged(mid)) {
                out.status = TrajectoryStatus::Diverged;
                return out;
            }
            out.states.push_back(rotate_map->apply(mid));
        } else {
            out.states.push_back(period_map.apply(out.states.back()));
        }
        out.times.push_back(static_cast<double>(n + 1) * schedule.period());
        if (diverged(out.states.back())) {
            out.status = TrajectoryStatus::Diverged;
            return out;
        }
    }
    return out;
}

namespace {

// Fixed-size kernel: long cross-check runs are dominated by 4x4 products.
template <int Dim>
PhotonSummary photon_summary_fixed(const GaussianState& state, const Matrix& period_map,
                                   std::uint64_t periods, double divergence_guard) {
    using M = Eigen::Matrix<double, Dim, Dim>;
    using V = Eigen::Matrix<double, Dim, 1>;
    const M s = period_map;
    V mean = state.mean();
    M cov = state.covariance();
    const double offset = Dim / 2.0;
    auto total = [&] { return (cov.trace() + mean.squaredNorm() - offset) / 2.0; };

    PhotonSummary out;
    out.final_total = out.max_total = total();
    for (std::uint64_t n = 0; n < periods; ++n) {
        mean = s * mean;
        cov = (s * cov * s.transpose()).eval();
        out.final_total = total();
        out.max_total = std::max(out.max_total, out.final_total);
        out.periods_completed = n + 1;
        if (!std::isfinite(out.final_total) || out.final_total > divergence_guard) {
            out.status = TrajectoryStatus::Diverged;
            break;
        }
    }
    return out;
}

} // namespace

PhotonSummary photon_summary(const GaussianState& state, const DriveSchedule& schedule, double divergence_guard) {
    const Matrix s = period_symplectic(schedule, state.mode_count()).matrix();
    if (state.mode_count() == 1) return photon_summary_fixed<2>(state, s, schedule.periods(), divergence_guard);
    return photon_summary_fixed<4>(state, s, schedule.periods(), divergence_guard);
}

std::optional<double> stable_photon_bound(const GaussianState& state, const DriveSchedule& schedule) {
    double kappa = 0.0;
    if (state.mode_count() == 1) {
        const auto a = floquet::stable_segment_matrix(schedule.omega(), schedule.tau2()) *
                       floquet::unstable_segment_matrix(-schedule.gamma(), schedule.tau1());
        if (!(std::abs(a.trace()) < 2.0)) return std::nullopt;
        kappa = floquet::stable_orbit_bound(a);
    } else {
        const auto blocks = two_mode_period_blocks(schedule);
        if (!(std::abs(blocks.plus.trace()) < 2.0) || !(std::abs(blocks.minus.trace()) < 2.0)) {
            return std::nullopt;
        }
        // The +- change of basis is orthogonal, so block norms carry over.
        kappa = std::max(floquet::stable_orbit_bound(blocks.plus), floquet::stable_orbit_bound(blocks.minus));
    }
    const double energy = state.covariance().trace() + state.mean().squaredNorm();
    return (kappa * kappa * energy - static_cast<double>(state.mode_count())) / 2.0;
}

} // namespace zeno::gaussian
