#include "zeno/fock.hpp"

#include "zeno/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

namespace zeno::fock {

namespace {

int mode_count_of(HamiltonianKind kind) {
    switch (kind) {
    case HamiltonianKind::TwoModeUnstable:
    case HamiltonianKind::TwoModeStable: return 2;
    case HamiltonianKind::SingleModeUnstable:
    case HamiltonianKind::SingleModeStable: return 1;
    }
    return 0;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void join(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

std::vector<HamiltonianMatrix::Sector> find_sectors(const Eigen::SparseMatrix<double>& m) {
    const auto n = static_cast<std::size_t>(m.rows());
    DisjointSets sets(n);
    for (int k = 0; k < m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
            if (it.value() != 0.0) sets.join(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()));
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);

    std::vector<HamiltonianMatrix::Sector> sectors;
    sectors.reserve(groups.size());
    std::vector<Eigen::Index> local(n, -1);
    for (auto& [root, states] : groups) {
        HamiltonianMatrix::Sector sector;
        sector.states = std::move(states);
        const auto size = static_cast<Eigen::Index>(sector.states.size());
        for (Eigen::Index i = 0; i < size; ++i) local[sector.states[i]] = i;
        sector.block = Eigen::MatrixXd::Zero(size, size);
        for (std::size_t s : sector.states) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, static_cast<Eigen::Index>(s)); it; ++it) {
                sector.block(local[static_cast<std::size_t>(it.row())], local[s]) = it.value();
            }
        }
        sectors.push_back(std::move(sector));
    }
    std::sort(sectors.begin(), sectors.end(),
              [](const auto& l, const auto& r) { return l.states.front() < r.states.front(); });
    return sectors;
}

double photon_sum(const FockBasis& basis, std::size_t i) {
    double n = basis.occupation(i, 0);
    if (basis.mode_count() == 2) n += basis.occupation(i, 1);
    return n;
}

// Amplitudes of a single-mode preparation on levels 0..cutoff, before
// renormalization, together with the population they retain.
std::vector<cplx> mode_amplitudes(const ModePreparation& p, int cutoff) {
    const bool coherent = p.alpha != cplx(0.0, 0.0);
    const bool squeezed = p.squeeze_r != 0.0;
    const bool number = p.number != 0;
    if (static_cast<int>(coherent) + static_cast<int>(squeezed) + static_cast<int>(number) > 1) {
        throw InvalidState("a Fock mode preparation takes one of number, alpha or squeezing");
    }
    if (!std::isfinite(p.alpha.real()) || !std::isfinite(p.alpha.imag()) || !std::isfinite(p.squeeze_r) ||
        !std::isfinite(p.squeeze_phi) || p.squeeze_r < 0.0 || p.number < 0) {
        throw InvalidState("mode preparation needs finite alpha, phi, r >= 0 and n >= 0");
    }
    if (p.number > cutoff) {
        throw InvalidCutoff("number state " + std::to_string(p.number) + " exceeds cutoff " +
                            std::to_string(cutoff));
    }
    std::vector<cplx> c(static_cast<std::size_t>(cutoff) + 1, cplx(0.0, 0.0));
    if (coherent) {
        c[0] = std::exp(-std::norm(p.alpha) / 2.0);
        for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * p.alpha / std::sqrt(static_cast<double>(n));
    } else if (squeezed) {
        const cplx ratio = -std::polar(std::tanh(p.squeeze_r), p.squeeze_phi);
        c[0] = 1.0 / std::sqrt(std::cosh(p.squeeze_r));
        for (int n = 2; n <= cutoff; n += 2) {
            c[n] = c[n - 2] * ratio * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
        }
    } else {
        c[static_cast<std::size_t>(p.number)] = 1.0;
    }
    double kept = 0.0;
    for (const auto& v : c) kept += std::norm(v);
    if (1.0 - kept > 1e-10) {
        throw InvalidCutoff("cutoff " + std::to_string(cutoff) + " truncates " + std::to_string(1.0 - kept) +
                            " of the initial population");
    }
    for (auto& v : c) v /= std::sqrt(kept);
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// FockBasis

FockBasis::FockBasis(int mode_count, int cutoff) : mode_count_(mode_count), cutoff_(cutoff) {
    if (mode_count != 1 && mode_count != 2) {
        throw InvalidParameter("mode count must be 1 or 2");
    }
    if (cutoff < 1) {
        throw InvalidCutoff("cutoff must be at least 1");
    }
    const auto levels = static_cast<std::size_t>(cutoff) + 1;
    size_ = mode_count == 1 ? levels : levels * levels;
}

std::size_t FockBasis::index(int n_a, int n_b) const {
    if (n_a < 0 || n_a > cutoff_ || n_b < 0 || n_b > cutoff_ || (mode_count_ == 1 && n_b != 0)) {
        throw InvalidCutoff("occupation outside the truncated basis");
    }
    return mode_count_ == 1 ? static_cast<std::size_t>(n_a)
                            : static_cast<std::size_t>(n_a) * static_cast<std::size_t>(cutoff_ + 1) +
                                  static_cast<std::size_t>(n_b);
}

int FockBasis::occupation(std::size_t index, int mode) const {
    const auto levels = static_cast<std::size_t>(cutoff_) + 1;
    if (mode_count_ == 1) return static_cast<int>(index);
    return static_cast<int>(mode == 0 ? index / levels : index % levels);
}

// ---------------------------------------------------------------------------
// Hamiltonians

HamiltonianMatrix::HamiltonianMatrix(HamiltonianKind kind, FockBasis basis, Eigen::SparseMatrix<double> matrix)
    : kind_(kind), basis_(basis), matrix_(std::move(matrix)) {
    if (static_cast<std::size_t>(matrix_.rows()) != basis_.size() || matrix_.rows() != matrix_.cols()) {
        throw InvalidParameter("Hamiltonian dimension does not match its basis");
    }
    if (hermiticity_defect() > 1e-12) {
        throw InconsistentMatrix("Hamiltonian is not Hermitian");
    }
    sectors_ = find_sectors(matrix_);
}

Eigen::MatrixXcd HamiltonianMatrix::dense() const { return Eigen::MatrixXd(matrix_).cast<cplx>(); }

double HamiltonianMatrix::hermiticity_defect() const {
    const Eigen::SparseMatrix<double> diff = matrix_ - Eigen::SparseMatrix<double>(matrix_.transpose());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

double HamiltonianMatrix::photon_sum_commutator() const {
    // [H, N]_ij = H_ij (N_j - N_i) for diagonal N.
    double worst = 0.0;
    for (int k = 0; k < matrix_.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, k); it; ++it) {
            const double delta = photon_sum(basis_, static_cast<std::size_t>(it.col())) -
                                 photon_sum(basis_, static_cast<std::size_t>(it.row()));
            worst = std::max(worst, std::abs(it.value() * delta));
        }
    }
    return worst;
}

HamiltonianMatrix build_hamiltonian(HamiltonianKind kind, double coupling, int cutoff) {
    if (!std::isfinite(coupling) || coupling < 0.0) {
        throw InvalidParameter("coupling must be finite and non-negative");
    }
    const FockBasis basis(mode_count_of(kind), cutoff);
    const int d = cutoff;
    std::vector<Eigen::Triplet<double>> entries;
    auto add_pair = [&](std::size_t i, std::size_t j, double v) {
        if (v == 0.0) return;
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        entries.emplace_back(static_cast<int>(j), static_cast<int>(i), v);
    };

    switch (kind) {
    case HamiltonianKind::TwoModeUnstable:
        // a^dag b^dag |na, nb> = sqrt((na+1)(nb+1)) |na+1, nb+1>
        for (int na = 0; na < d; ++na)
            for (int nb = 0; nb < d; ++nb)
                add_pair(basis.index(na + 1, nb + 1), basis.index(na, nb),
                         coupling * std::sqrt(static_cast<double>((na + 1) * (nb + 1))));
        break;
    case HamiltonianKind::TwoModeStable:
        // a^dag b |na, nb> = sqrt((na+1) nb) |na+1, nb-1>
        for (int na = 0; na < d; ++na)
            for (int nb = 1; nb <= d; ++nb)
                add_pair(basis.index(na + 1, nb - 1), basis.index(na, nb),
                         coupling * std::sqrt(static_cast<double>((na + 1) * nb)));
        break;
    case HamiltonianKind::SingleModeUnstable:
        for (int n = 0; n + 2 <= d; ++n)
            add_pair(basis.index(n + 2), basis.index(n),
                     0.5 * coupling * std::sqrt(static_cast<double>((n + 1) * (n + 2))));
        break;
    case HamiltonianKind::SingleModeStable:
        // (a^dag a + a a^dag) / 2 = n + 1/2, diagonal in the number basis.
        if (coupling != 0.0)
            for (int n = 0; n <= d; ++n)
                entries.emplace_back(n, n, coupling * (n + 0.5));
        break;
    }

    const auto dim = static_cast<Eigen::Index>(basis.size());
    Eigen::SparseMatrix<double> m(dim, dim);
    m.setFromTriplets(entries.begin(), entries.end());
    return {kind, basis, std::move(m)};
}

// ---------------------------------------------------------------------------
// Unitaries

SegmentUnitary::SegmentUnitary(FockBasis basis, std::vector<Block> blocks)
    : basis_(basis), blocks_(std::move(blocks)) {}

StateVector SegmentUnitary::apply(const StateVector& amplitudes) const {
    if (static_cast<std::size_t>(amplitudes.size()) != basis_.size()) {
        throw InvalidState("state dimension does not match the unitary");
    }
    StateVector out(amplitudes.size());
    Eigen::VectorXcd local;
    Eigen::VectorXcd mapped;
    for (const auto& b : blocks_) {
        const auto n = static_cast<Eigen::Index>(b.states.size());
        if (n == 1) {
            out(static_cast<Eigen::Index>(b.states[0])) =
                b.unitary(0, 0) * amplitudes(static_cast<Eigen::Index>(b.states[0]));
            continue;
        }
        local.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) local(i) = amplitudes(static_cast<Eigen::Index>(b.states[i]));
        mapped.noalias() = b.unitary * local;
        for (Eigen::Index i = 0; i < n; ++i) out(static_cast<Eigen::Index>(b.states[i])) = mapped(i);
    }
    return out;
}

Eigen::MatrixXcd SegmentUnitary::dense() const {
    const auto dim = static_cast<Eigen::Index>(basis_.size());
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& b : blocks_)
        for (std::size_t i = 0; i < b.states.size(); ++i)
            for (std::size_t j = 0; j < b.states.size(); ++j)
                u(static_cast<Eigen::Index>(b.states[i]), static_cast<Eigen::Index>(b.states[j])) =
                    b.unitary(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return u;
}

double SegmentUnitary::unitarity_defect() const {
    double worst = 0.0;
    for (const auto& b : blocks_) {
        const auto n = b.unitary.rows();
        const Eigen::MatrixXcd defect = b.unitary.adjoint() * b.unitary - Eigen::MatrixXcd::Identity(n, n);
        worst = std::max(worst, defect.cwiseAbs().maxCoeff());
    }
    return worst;
}

SegmentUnitary segment_unitary(const HamiltonianMatrix& h, double duration) {
    if (!std::isfinite(duration)) {
        throw InvalidParameter("segment duration must be finite");
    }
    std::vector<SegmentUnitary::Block> blocks;
    blocks.reserve(h.sectors().size());
    for (const auto& sector : h.sectors()) {
        SegmentUnitary::Block block;
        block.states = sector.states;
        const auto n = sector.block.rows();
        if (n == 1) {
            block.unitary = Eigen::MatrixXcd::Constant(1, 1, std::exp(cplx(0.0, -sector.block(0, 0) * duration)));
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sector.block);
            if (solver.info() != Eigen::Success) {
                throw NumericError("eigendecomposition failed for a sector of size " + std::to_string(n) +
                                   " (max |H| = " + std::to_string(sector.block.cwiseAbs().maxCoeff()) + ")");
            }
            const Eigen::MatrixXcd v = solver.eigenvectors().cast<cplx>();
            Eigen::VectorXcd phases(n);
            for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(cplx(0.0, -solver.eigenvalues()(k) * duration));
            block.unitary = v * phases.asDiagonal() * v.transpose();
        }
        blocks.push_back(std::move(block));
    }
    return {h.basis(), std::move(blocks)};
}

// ---------------------------------------------------------------------------
// States

FockState::FockState(FockBasis basis, StateVector amplitudes) : basis_(basis), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != basis_.size()) {
        throw InvalidState("amplitude count does not match the truncated basis");
    }
    if (!amplitudes_.allFinite() || std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
        throw InvalidState("state is not normalized");
    }
}

FockState FockState::vacuum(int mode_count, int cutoff) {
    const FockBasis basis(mode_count, cutoff);
    StateVector amps = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
    amps(0) = 1.0;
    return {basis, std::move(amps)};
}

FockState FockState::number_state(int cutoff, int n_a, std::optional<int> n_b) {
    const FockBasis basis(n_b ? 2 : 1, cutoff);
    if (n_a < 0 || n_a > cutoff || (n_b && (*n_b < 0 || *n_b > cutoff))) {
        throw InvalidCutoff("number state does not fit below cutoff " + std::to_string(cutoff));
    }
    StateVector amps = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
    amps(static_cast<Eigen::Index>(basis.index(n_a, n_b.value_or(0)))) = 1.0;
    return {basis, std::move(amps)};
}

FockState FockState::prepare(std::span<const ModePreparation> modes, int cutoff) {
    const FockBasis basis(static_cast<int>(modes.size()), cutoff);
    const auto a = mode_amplitudes(modes[0], cutoff);
    StateVector amps(static_cast<Eigen::Index>(basis.size()));
    if (modes.size() == 1) {
        for (std::size_t i = 0; i < a.size(); ++i) amps(static_cast<Eigen::Index>(i)) = a[i];
    } else {
        const auto b = mode_amplitudes(modes[1], cutoff);
        for (int na = 0; na <= cutoff; ++na)
            for (int nb = 0; nb <= cutoff; ++nb)
                amps(static_cast<Eigen::Index>(basis.index(na, nb))) = a[na] * b[nb];
    }
    amps.normalize();
    return {basis, std::move(amps)};
}

double FockState::leakage() const {
    const double edge = 0.9 * basis_.cutoff();
    double population = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        bool high = basis_.occupation(i, 0) > edge;
        if (basis_.mode_count() == 2) high = high || basis_.occupation(i, 1) > edge;
        if (high) population += std::norm(amplitudes_(static_cast<Eigen::Index>(i)));
    }
    return population;
}

double expectation(const FockState& state, const Observable& observable) {
    const auto& basis = state.basis();
    const auto& amps = state.amplitudes();
    if (observable.kind == Observable::Kind::Projection) {
        if (observable.index >= basis.size()) {
            throw InvalidParameter("projection index " + std::to_string(observable.index) + " outside basis of size " +
                                   std::to_string(basis.size()));
        }
        return std::norm(amps(static_cast<Eigen::Index>(observable.index)));
    }
    if (observable.kind == Observable::Kind::Nb && basis.mode_count() != 2) {
        throw InvalidParameter("n_b requested on a single-mode state");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double n = 0.0;
        switch (observable.kind) {
        case Observable::Kind::Na: n = basis.occupation(i, 0); break;
        case Observable::Kind::Nb: n = basis.occupation(i, 1); break;
        case Observable::Kind::Ntotal: n = photon_sum(basis, i); break;
        case Observable::Kind::Projection: break;
        }
        sum += n * std::norm(amps(static_cast<Eigen::Index>(i)));
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Propagation

namespace {

SegmentUnitary make_segment(const floquet::DriveSchedule& s, int mode_count, int cutoff, bool squeeze) {
    HamiltonianKind kind;
    if (mode_count == 2) {
        kind = squeeze ? HamiltonianKind::TwoModeUnstable : HamiltonianKind::TwoModeStable;
    } else {
        kind = squeeze ? HamiltonianKind::SingleModeUnstable : HamiltonianKind::SingleModeStable;
    }
    const double coupling = squeeze ? s.gamma() : s.omega();
    const double duration = squeeze ? s.tau1() : s.tau2();
    return segment_unitary(build_hamiltonian(kind, coupling, cutoff), duration);
}

PeriodObservables observe(const FockState& state, std::uint64_t period, double drift) {
    PeriodObservables o;
    o.period = period;
    o.n_a = expectation(state, Observable::na());
    o.n_b = state.mode_count() == 2 ? expectation(state, Observable::nb()) : 0.0;
    o.n_total = o.n_a + o.n_b;
    o.norm_drift = drift;
    o.leakage = state.leakage();
    return o;
}

} // namespace

PeriodPropagator::PeriodPropagator(const floquet::DriveSchedule& schedule, int mode_count, int cutoff)
    : squeeze_(make_segment(schedule, mode_count, cutoff, true)),
      rotate_(make_segment(schedule, mode_count, cutoff, false)) {}

double PeriodPropagator::step(FockState& state) const {
    state.amplitudes_ = rotate_.apply(squeeze_.apply(state.amplitudes_));
    const double norm = state.amplitudes_.norm();
    state.amplitudes_ /= norm;
    return std::abs(norm - 1.0);
}

PropagationResult propagate(const FockState& state, const floquet::DriveSchedule& schedule,
                            const PropagateOptions& options) {
    const PeriodPropagator propagator(schedule, state.mode_count(), state.cutoff());
    PropagationResult out;
    out.observables.reserve(schedule.periods() + 1);
    FockState current = state;

    auto record = [&](std::uint64_t n, double drift) {
        out.observables.push_back(observe(current, n, drift));
        if (options.keep_states) out.states.push_back(current);
        if (out.truncation_safe && out.observables.back().leakage > options.leakage_tolerance) {
            out.truncation_safe = false;
            out.first_unsafe_period = n;
        }
    };

    record(0, 0.0);
    for (std::uint64_t n = 1; n <= schedule.periods(); ++n) {
        if (!out.truncation_safe && options.stop_when_unsafe) break;
        const double drift = propagator.step(current);
        record(n, drift);
    }
    return out;
}

int default_cutoff(const floquet::DriveSchedule& schedule, int max_cutoff) {
    const double x = static_cast<double>(schedule.periods()) * schedule.gamma_tau1();
    if (x > 20.0) return std::max(20, max_cutoff);
    const double sh = std::sinh(x);
    const double heuristic = std::ceil(10.0 * sh * sh + 10.0);
    const double d = std::min(static_cast<double>(max_cutoff), std::max(20.0, heuristic));
    return std::max(20, static_cast<int>(d));
}

// ---------------------------------------------------------------------------
// Zeno threshold scan

std::vector<ZenoPoint> zeno_threshold_scan(double gamma_tau1, std::span<const double> omega_tau2_grid,
                                           const ZenoScanOptions& options) {
    if (!std::isfinite(gamma_tau1) || gamma_tau1 < 0.0) {
        throw InvalidParameter("gamma*tau1 must be finite and non-negative");
    }
    if (options.periods > 200) {
        throw InvalidParameter("Zeno scans are limited to 200 periods");
    }
    if (!(options.growth_factor > 1.0)) {
        throw InvalidParameter("growth factor must exceed 1");
    }
    std::vector<ZenoPoint> out;
    out.reserve(omega_tau2_grid.size());
    for (double w : omega_tau2_grid) {
        if (!std::isfinite(w) || w < 0.0 || w > std::numbers::pi + 1e-12) {
            throw InvalidParameter("omega*tau2 grid must lie within [0, pi]");
        }
        const auto schedule = floquet::DriveSchedule::from_products(gamma_tau1, w, options.periods);
        const PeriodPropagator propagator(schedule, options.mode_count, options.cutoff);
        FockState state = FockState::vacuum(options.mode_count, options.cutoff);

        ZenoPoint point;
        point.omega_tau2 = w;
        const double initial = expectation(state, Observable::ntotal());
        const double threshold = options.growth_factor * std::max(initial, 1.0);
        point.max_n_total = initial;
        point.growth = GrowthClass::Bounded;
        for (std::uint64_t n = 1; n <= options.periods; ++n) {
            propagator.step(state);
            point.periods_run = n;
            if (state.leakage() > options.leakage_tolerance) {
                point.growth = GrowthClass::Indeterminate;
                break;
            }
            const double total = expectation(state, Observable::ntotal());
            point.max_n_total = std::max(point.max_n_total, total);
            if (total > threshold) {
                point.growth = GrowthClass::Growth;
                break;
            }
        }
        out.push_back(point);
    }
    return out;
}

std::vector<double> zeno_boundary(double gamma_tau1) {
    if (!std::isfinite(gamma_tau1) || gamma_tau1 < 0.0) {
        throw InvalidParameter("gamma*tau1 must be finite and non-negative");
    }
    const double first = std::acos(1.0 / std::cosh(gamma_tau1));
    return {first, std::numbers::pi - first};
}

std::string_view to_string(GrowthClass g) noexcept {
    switch (g) {
    case GrowthClass::Growth: return "growth";
    case GrowthClass::Bounded: return "bounded";
    case GrowthClass::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

} // namespace zeno::fock
