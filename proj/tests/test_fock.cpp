#include "doctest.h"

#include "zeno/errors.hpp"
#include "zeno/fock.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <array>
#include <cmath>
#include <numbers>

using namespace zeno::fock;
using zeno::floquet::DriveSchedule;

namespace {

Eigen::MatrixXd annihilation(int cutoff) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// exp(-iHt) via one dense eigendecomposition of the full matrix.
Eigen::MatrixXcd dense_exponential(const Eigen::MatrixXd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(cplx(0.0, -solver.eigenvalues()(k) * t));
    const Eigen::MatrixXcd v = solver.eigenvectors().cast<cplx>();
    return v * phases.asDiagonal() * v.adjoint();
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("basis indexing is lexicographic") {
    const FockBasis two(2, 3);
    CHECK(two.size() == 16);
    CHECK(two.index(0, 0) == 0);
    CHECK(two.index(0, 1) == 1);
    CHECK(two.index(1, 0) == 4);
    CHECK(two.index(3, 3) == 15);
    CHECK(two.occupation(6, 0) == 1);
    CHECK(two.occupation(6, 1) == 2);
    CHECK_THROWS_AS(two.index(4, 0), zeno::InvalidCutoff);
    CHECK_THROWS_AS(FockBasis(2, 0), zeno::InvalidCutoff);
    CHECK_THROWS_AS(FockBasis(3, 4), zeno::InvalidParameter);
}

TEST_CASE("hamiltonian matrix elements") {
    SUBCASE("exchange at D = 1") {
        const auto h = build_hamiltonian(HamiltonianKind::TwoModeStable, 0.7, 1);
        const auto d = h.dense();
        const auto& b = h.basis();
        CHECK(d(b.index(0, 1), b.index(1, 0)).real() == doctest::Approx(0.7));
        CHECK(d(b.index(1, 0), b.index(0, 1)).real() == doctest::Approx(0.7));
        CHECK(h.photon_sum_commutator() < 1e-12);
    }
    SUBCASE("single-mode rotation includes the vacuum term") {
        const auto h = build_hamiltonian(HamiltonianKind::SingleModeStable, 2.0, 6);
        const auto d = h.dense();
        for (int n = 0; n <= 6; ++n) CHECK(d(n, n).real() == doctest::Approx(2.0 * (n + 0.5)));
    }
    SUBCASE("pair creation from vacuum") {
        const auto h = build_hamiltonian(HamiltonianKind::TwoModeUnstable, 1.3, 4);
        const auto& b = h.basis();
        CHECK(h.dense()(b.index(1, 1), b.index(0, 0)).real() == doctest::Approx(1.3));
        CHECK(h.photon_sum_commutator() > 1.0);
    }
    SUBCASE("agree with truncated ladder-operator products") {
        const int d = 5;
        const Eigen::MatrixXd a1 = annihilation(d);
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d + 1, d + 1);
        const Eigen::MatrixXd a = Eigen::kroneckerProduct(a1, id);
        const Eigen::MatrixXd b = Eigen::kroneckerProduct(id, a1);
        const Eigen::MatrixXd pairs = 0.9 * (a.transpose() * b.transpose() + a * b);
        const Eigen::MatrixXd exchange = 1.1 * (a.transpose() * b + a * b.transpose());
        const Eigen::MatrixXd degenerate = 0.5 * 0.8 * (a1.transpose() * a1.transpose() + a1 * a1);
        CHECK(max_abs(build_hamiltonian(HamiltonianKind::TwoModeUnstable, 0.9, d).dense() - pairs.cast<cplx>()) < 1e-14);
        CHECK(max_abs(build_hamiltonian(HamiltonianKind::TwoModeStable, 1.1, d).dense() - exchange.cast<cplx>()) < 1e-14);
        CHECK(max_abs(build_hamiltonian(HamiltonianKind::SingleModeUnstable, 0.8, d).dense() -
                      degenerate.cast<cplx>()) < 1e-14);
    }
    SUBCASE("hermitian and sectored") {
        for (auto kind : {HamiltonianKind::TwoModeUnstable, HamiltonianKind::TwoModeStable,
                          HamiltonianKind::SingleModeUnstable, HamiltonianKind::SingleModeStable}) {
            const auto h = build_hamiltonian(kind, 0.5, 8);
            CHECK(h.hermiticity_defect() < 1e-12);
            std::size_t covered = 0;
            for (const auto& s : h.sectors()) covered += s.states.size();
            CHECK(covered == h.basis().size());
        }
        // Exchange conserves n_a + n_b: one sector per total photon number.
        CHECK(build_hamiltonian(HamiltonianKind::TwoModeStable, 1.0, 8).sectors().size() == 17);
        // Pair creation conserves n_a - n_b.
        CHECK(build_hamiltonian(HamiltonianKind::TwoModeUnstable, 1.0, 8).sectors().size() == 17);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_hamiltonian(HamiltonianKind::TwoModeStable, 1.0, 0), zeno::InvalidCutoff);
        CHECK_THROWS_AS(build_hamiltonian(HamiltonianKind::TwoModeStable, -1.0, 4), zeno::InvalidParameter);
    }
}

TEST_CASE("segment unitaries") {
    const auto h = build_hamiltonian(HamiltonianKind::TwoModeUnstable, 0.8, 6);
    SUBCASE("zero duration is the identity") {
        const auto u = segment_unitary(h, 0.0).dense();
        CHECK(max_abs(u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())) < 1e-14);
    }
    SUBCASE("semigroup") {
        const auto u1 = segment_unitary(h, 0.3).dense();
        const auto u2 = segment_unitary(h, 0.45).dense();
        const auto u12 = segment_unitary(h, 0.75).dense();
        CHECK(max_abs(u1 * u2 - u12) < 1e-10);
    }
    SUBCASE("sector route equals the dense route") {
        const Eigen::MatrixXd dense_h = h.dense().real();
        CHECK(max_abs(segment_unitary(h, 1.7).dense() - dense_exponential(dense_h, 1.7)) < 1e-10);
        CHECK(segment_unitary(h, 1.7).unitarity_defect() < 1e-10);
    }
    SUBCASE("pi pulse swaps a single photon") {
        const double omega = 2.5;
        const auto hs = build_hamiltonian(HamiltonianKind::TwoModeStable, omega, 3);
        const auto u = segment_unitary(hs, std::numbers::pi / 2 / omega);
        const auto out = u.apply(FockState::number_state(3, 1, 0).amplitudes());
        CHECK(std::abs(std::abs(out(hs.basis().index(0, 1))) - 1.0) < 1e-9);
    }
}

TEST_CASE("states and expectations") {
    CHECK(expectation(FockState::vacuum(2, 4), Observable::na()) == 0.0);
    CHECK(expectation(FockState::number_state(4, 1, 1), Observable::ntotal()) == doctest::Approx(2.0));

    const FockBasis basis(2, 2);
    StateVector amps = StateVector::Zero(9);
    amps(basis.index(0, 0)) = 1.0 / std::numbers::sqrt2;
    amps(basis.index(1, 1)) = 1.0 / std::numbers::sqrt2;
    const FockState bell(basis, amps);
    CHECK(expectation(bell, Observable::na()) == doctest::Approx(0.5));
    CHECK(expectation(bell, Observable::projection(basis.index(1, 1))) == doctest::Approx(0.5));
    CHECK_THROWS_AS(expectation(bell, Observable::projection(9)), zeno::InvalidParameter);
    CHECK_THROWS_AS(expectation(FockState::vacuum(1, 3), Observable::nb()), zeno::InvalidParameter);

    CHECK_THROWS_AS(FockState::number_state(3, 4, 0), zeno::InvalidCutoff);
    CHECK_THROWS_AS(FockState(basis, StateVector::Ones(9)), zeno::InvalidState);

    CHECK(FockState::number_state(10, 10, 0).leakage() == doctest::Approx(1.0));
    CHECK(FockState::number_state(10, 9, 9).leakage() == 0.0);

    SUBCASE("prepared product states") {
        const std::array<ModePreparation, 2> modes{ModePreparation{0, {1.0, 0.5}}, ModePreparation{}};
        const auto s = FockState::prepare(modes, 30);
        CHECK(expectation(s, Observable::na()) == doctest::Approx(1.25).epsilon(1e-10));
        CHECK(expectation(s, Observable::nb()) == 0.0);

        const std::array<ModePreparation, 1> sq{ModePreparation{0, {0.0, 0.0}, 0.5, 0.7}};
        CHECK(expectation(FockState::prepare(sq, 60), Observable::na()) ==
              doctest::Approx(std::pow(std::sinh(0.5), 2)).epsilon(1e-10));

        const std::array<ModePreparation, 1> big{ModePreparation{0, {3.0, 0.0}}};
        CHECK_THROWS_AS(FockState::prepare(big, 10), zeno::InvalidCutoff);
        const std::array<ModePreparation, 1> mixed{ModePreparation{1, {1.0, 0.0}}};
        CHECK_THROWS_AS(FockState::prepare(mixed, 10), zeno::InvalidState);
    }
}

TEST_CASE("propagation") {
    SUBCASE("vacuum is inert under exchange") {
        const auto r = propagate(FockState::vacuum(2, 10), DriveSchedule(0.0, 0.5, 3.0, 0.5, 25));
        REQUIRE(r.observables.size() == 26);
        for (const auto& o : r.observables) CHECK(o.n_total == 0.0);
        CHECK(r.truncation_safe);
    }
    SUBCASE("pair creation matches sinh^2") {
        const auto r = propagate(FockState::vacuum(2, 30), DriveSchedule(0.25, 1.0, 0.0, 1.0, 1));
        REQUIRE(r.observables.size() == 2);
        CHECK(std::abs(r.observables[1].n_a - 0.06381298260319039) < 1e-8);
        CHECK(r.truncation_safe);
    }
    SUBCASE("quarter exchange splits a photon evenly") {
        const auto r = propagate(FockState::number_state(4, 1, 0),
                                 DriveSchedule::from_products(0.0, std::numbers::pi / 4, 1),
                                 PropagateOptions{.keep_states = true});
        REQUIRE(r.states.size() == 2);
        CHECK(expectation(r.states[1], Observable::projection(r.states[1].basis().index(1, 0))) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("leakage marks the run unsafe and stops it") {
        const auto r = propagate(FockState::vacuum(2, 10), DriveSchedule::from_products(0.5, 0.0, 50));
        CHECK_FALSE(r.truncation_safe);
        REQUIRE(r.first_unsafe_period.has_value());
        CHECK(r.observables.size() == *r.first_unsafe_period + 1);
        CHECK(r.observables.back().leakage > kDefaultLeakageTolerance);
    }
    SUBCASE("norm drift stays at roundoff") {
        const auto r = propagate(FockState::vacuum(2, 40), DriveSchedule::from_products(0.1, 1.0, 50));
        for (const auto& o : r.observables) CHECK(o.norm_drift < 1e-12);
    }
}

TEST_CASE("default cutoff policy") {
    CHECK(default_cutoff(DriveSchedule::from_products(0.0, 1.0, 100)) == 20);
    CHECK(default_cutoff(DriveSchedule::from_products(0.1, 1.0, 10)) == 24);  // ceil(10 sinh^2(1) + 10)
    CHECK(default_cutoff(DriveSchedule::from_products(0.2, 1.0, 50)) == 60);
    CHECK(default_cutoff(DriveSchedule::from_products(0.2, 1.0, 50), 200) == 200);
}

TEST_CASE("zeno threshold scan") {
    SUBCASE("examples either side of the boundary") {
        const std::array<double, 2> grid{0.05, 1.0};
        const auto pts = zeno_threshold_scan(0.2, grid);
        REQUIRE(pts.size() == 2);
        CHECK(pts[0].growth == GrowthClass::Growth);
        CHECK(pts[1].growth == GrowthClass::Bounded);
    }
    SUBCASE("no pump, no growth") {
        const std::array<double, 4> grid{0.0, 0.5, 1.5, std::numbers::pi};
        for (const auto& p : zeno_threshold_scan(0.0, grid, ZenoScanOptions{.periods = 50, .cutoff = 20})) {
            CHECK(p.growth == GrowthClass::Bounded);
            CHECK(p.max_n_total == 0.0);
        }
    }
    SUBCASE("transitions bracket the analytic boundary") {
        const double g = 0.2;
        std::vector<double> grid;
        const int points = 33;
        const double step = std::numbers::pi / (points - 1);
        for (int i = 0; i < points; ++i) grid.push_back(i * step);
        const auto pts = zeno_threshold_scan(g, grid);
        const auto boundary = zeno_boundary(g);
        REQUIRE(boundary.size() == 2);
        std::vector<double> transitions;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            CHECK(pts[i].growth != GrowthClass::Indeterminate);
            if (pts[i].growth != pts[i + 1].growth) transitions.push_back(0.5 * (grid[i] + grid[i + 1]));
        }
        REQUIRE(transitions.size() == boundary.size());
        for (std::size_t k = 0; k < boundary.size(); ++k) CHECK(std::abs(transitions[k] - boundary[k]) <= step);
    }
    SUBCASE("argument checks") {
        const std::array<double, 1> outside{4.0};
        CHECK_THROWS_AS(zeno_threshold_scan(0.2, outside), zeno::InvalidParameter);
        const std::array<double, 1> inside{1.0};
        CHECK_THROWS_AS(zeno_threshold_scan(0.2, inside, ZenoScanOptions{.periods = 500}), zeno::InvalidParameter);
    }
}
