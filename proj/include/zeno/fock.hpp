#pragma once

// Truncated number-basis propagation, used as an exact oracle for the
// Gaussian simulator.
//
// Basis states are ordered lexicographically: index = n_a * (D + 1) + n_b
// for two modes, index = n for one mode, with D the per-mode cutoff.
// Hamiltonians are the projections P H P of the untruncated operators onto
// the retained levels.

#include "zeno/floquet.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace zeno::fock {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;

class FockBasis {
public:
    FockBasis(int mode_count, int cutoff);

    int mode_count() const noexcept { return mode_count_; }
    int cutoff() const noexcept { return cutoff_; }
    std::size_t size() const noexcept { return size_; }

    std::size_t index(int n_a, int n_b = 0) const;
    int occupation(std::size_t index, int mode) const;

private:
    int mode_count_;
    int cutoff_;
    std::size_t size_;
};

enum class HamiltonianKind { TwoModeUnstable, TwoModeStable, SingleModeUnstable, SingleModeStable };

/// Real symmetric Hamiltonian over the truncated basis. Besides the sparse
/// matrix it keeps the decomposition into invariant sectors (connected
/// components of its coupling graph) so that exponentials stay cheap at
/// large cutoffs.
class HamiltonianMatrix {
public:
    struct Sector {
        std::vector<std::size_t> states;
        Eigen::MatrixXd block;
    };

    HamiltonianMatrix(HamiltonianKind kind, FockBasis basis, Eigen::SparseMatrix<double> matrix);

    HamiltonianKind kind() const noexcept { return kind_; }
    const FockBasis& basis() const noexcept { return basis_; }
    const Eigen::SparseMatrix<double>& sparse() const noexcept { return matrix_; }
    const std::vector<Sector>& sectors() const noexcept { return sectors_; }

    Eigen::MatrixXcd dense() const;
    double hermiticity_defect() const;
    /// max |[H, n_a + n_b]|
    double photon_sum_commutator() const;

private:
    HamiltonianKind kind_;
    FockBasis basis_;
    Eigen::SparseMatrix<double> matrix_;
    std::vector<Sector> sectors_;
};

/// Throws InvalidCutoff for D < 1 and InvalidParameter for negative or
/// non-finite couplings.
///   TwoModeUnstable     Gamma (a^dag b^dag + a b)
///   TwoModeStable       Omega (a^dag b + a b^dag)
///   SingleModeUnstable  (Gamma / 2)(a^dag^2 + a^2)
///   SingleModeStable    (Omega / 2)(a^dag a + a a^dag)
HamiltonianMatrix build_hamiltonian(HamiltonianKind kind, double coupling, int cutoff);

/// exp(-i H t), block diagonal over the Hamiltonian's sectors.
class SegmentUnitary {
public:
    struct Block {
        std::vector<std::size_t> states;
        Eigen::MatrixXcd unitary;
    };

    SegmentUnitary(FockBasis basis, std::vector<Block> blocks);

    const FockBasis& basis() const noexcept { return basis_; }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }

    StateVector apply(const StateVector& amplitudes) const;
    Eigen::MatrixXcd dense() const;
    /// max |U^dag U - I| over all blocks.
    double unitarity_defect() const;

private:
    FockBasis basis_;
    std::vector<Block> blocks_;
};

/// Real eigendecomposition of every sector; throws NumericError with the
/// offending sector size when the solver fails.
SegmentUnitary segment_unitary(const HamiltonianMatrix& h, double duration);

/// Per-mode preparation for product initial states. Exactly one of the
/// alternatives may be non-trivial: a number state, a coherent amplitude or a
/// squeezed vacuum.
struct ModePreparation {
    int number = 0;
    cplx alpha{0.0, 0.0};
    double squeeze_r = 0.0;
    double squeeze_phi = 0.0;
};

class FockState {
public:
    /// Throws InvalidState when the amplitude count does not match the basis
    /// or the vector is not normalized within 1e-10.
    FockState(FockBasis basis, StateVector amplitudes);

    static FockState vacuum(int mode_count, int cutoff);
    /// Throws InvalidCutoff when n_a or n_b exceeds the cutoff.
    static FockState number_state(int cutoff, int n_a, std::optional<int> n_b = std::nullopt);
    /// Product state; coherent and squeezed components are truncated and the
    /// state renormalized. Throws InvalidCutoff when more than 1e-10 of the
    /// population would be lost to truncation.
    static FockState prepare(std::span<const ModePreparation> modes, int cutoff);

    const FockBasis& basis() const noexcept { return basis_; }
    int mode_count() const noexcept { return basis_.mode_count(); }
    int cutoff() const noexcept { return basis_.cutoff(); }
    const StateVector& amplitudes() const noexcept { return amplitudes_; }

    double norm() const { return amplitudes_.norm(); }
    /// Population in levels with any n_i > 0.9 D.
    double leakage() const;

private:
    FockBasis basis_;
    StateVector amplitudes_;

    friend class PeriodPropagator;
};

struct Observable {
    enum class Kind { Na, Nb, Ntotal, Projection };
    Kind kind = Kind::Ntotal;
    std::size_t index = 0;

    static Observable na() { return {Kind::Na, 0}; }
    static Observable nb() { return {Kind::Nb, 0}; }
    static Observable ntotal() { return {Kind::Ntotal, 0}; }
    static Observable projection(std::size_t index) { return {Kind::Projection, index}; }
};

/// Throws InvalidParameter for a basis index out of range or n_b on a
/// single-mode state.
double expectation(const FockState& state, const Observable& observable);

inline constexpr double kDefaultLeakageTolerance = 1e-8;

struct PeriodObservables {
    std::uint64_t period = 0;
    double n_a = 0.0;
    double n_b = 0.0;
    double n_total = 0.0;
    /// |norm - 1| before renormalization.
    double norm_drift = 0.0;
    double leakage = 0.0;
};

struct PropagateOptions {
    double leakage_tolerance = kDefaultLeakageTolerance;
    bool keep_states = false;
    /// Stop at the first period boundary whose leakage exceeds the tolerance.
    bool stop_when_unsafe = true;
};

struct PropagationResult {
    std::vector<PeriodObservables> observables;
    std::vector<FockState> states;
    bool truncation_safe = true;
    std::optional<std::uint64_t> first_unsafe_period;
};

/// Holds the two segment unitaries of a schedule, built once and reused.
class PeriodPropagator {
public:
    PeriodPropagator(const floquet::DriveSchedule& schedule, int mode_count, int cutoff);

    const SegmentUnitary& squeeze() const noexcept { return squeeze_; }
    const SegmentUnitary& rotate() const noexcept { return rotate_; }

    /// One full period; returns the norm drift and renormalizes in place.
    double step(FockState& state) const;

private:
    SegmentUnitary squeeze_;
    SegmentUnitary rotate_;
};

PropagationResult propagate(const FockState& state, const floquet::DriveSchedule& schedule,
                            const PropagateOptions& options = {});

/// max(20, ceil(10 sinh^2(N gamma tau1) + 10)), clamped to max_cutoff.
int default_cutoff(const floquet::DriveSchedule& schedule, int max_cutoff = 60);

enum class GrowthClass { Growth, Bounded, Indeterminate };

struct ZenoScanOptions {
    std::uint64_t periods = 100;
    int cutoff = 60;
    int mode_count = 2;
    /// Growth means <n_total> > growth_factor * max(<n_total>_0, 1).
    double growth_factor = 2.0;
    double leakage_tolerance = kDefaultLeakageTolerance;
};

struct ZenoPoint {
    double omega_tau2 = 0.0;
    GrowthClass growth = GrowthClass::Indeterminate;
    double max_n_total = 0.0;
    std::uint64_t periods_run = 0;
};

/// Vacuum propagation at fixed gamma tau1 for every grid value of omega tau2
/// in [0, pi]. Points whose truncation becomes unsafe before growth is seen
/// are reported as Indeterminate.
std::vector<ZenoPoint> zeno_threshold_scan(double gamma_tau1, std::span<const double> omega_tau2_grid,
                                           const ZenoScanOptions& options = {});

/// Values of omega tau2 in [0, pi] where |cos(omega tau2) cosh(gamma tau1)| = 1.
std::vector<double> zeno_boundary(double gamma_tau1);

std::string_view to_string(GrowthClass g) noexcept;

} // namespace zeno::fock
