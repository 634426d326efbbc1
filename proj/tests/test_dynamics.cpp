#include <catch2/catch_amalgamated.hpp>
#include <smsq/dynamics.hpp>
#include <smsq/metrology.hpp>

using namespace smsq;

TEST_CASE("initial state amplitudes") {
    FockBasis b1(1);
    auto s1 = initial_state(b1);
    CHECK(std::abs(s1.amplitudes[b1.index_of(FockState{{1, 0, 0, 0}})] - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(s1.amplitudes[b1.index_of(FockState{{0, 0, 0, 1}})] - 1 / std::sqrt(2.0)) < 1e-15);

    FockBasis b2(2);
    auto s2 = initial_state(b2);
    CHECK(std::abs(s2.amplitudes[b2.index_of(FockState{{2, 0, 0, 0}})] - 0.5) < 1e-15);
    CHECK(std::abs(s2.amplitudes[b2.index_of(FockState{{1, 0, 0, 1}})] - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(s2.amplitudes[b2.index_of(FockState{{0, 0, 0, 2}})] - 0.5) < 1e-15);

    for (int n : {1, 2, 7, 20}) {
        FockBasis b(n);
        auto s = initial_state(b);
        CHECK(std::abs(s.norm() - 1.0) < kTolNorm);
        CHECK(expectation_real(s, collective_operator(b, Gen::Jx)) == Catch::Approx(n / 2.0));
        CHECK(expectation_real(s, collective_operator(b, Gen::Kz)) == Catch::Approx(n / 2.0));
        CHECK(std::abs(expectation_real(s, collective_operator(b, Gen::Jz))) < 1e-12);
        CHECK(std::abs(expectation_real(s, collective_operator(b, Gen::Kx))) < 1e-12);
    }
}

TEST_CASE("evolution basics") {
    FockBasis b(6);
    auto psi0 = initial_state(b);
    auto h = hamiltonian(b, ModelParams{1.0, 6}, Picture::Lab);

    SECTION("t = 0 is the identity") {
        auto psi = evolve(b, psi0, h, 0.0);
        CHECK((psi.amplitudes - psi0.amplitudes).norm() < 1e-14);
    }
    SECTION("reversal") {
        auto fwd = evolve(b, psi0, h, 0.37);
        auto back = evolve(b, fwd, h, -0.37);
        CHECK((back.amplitudes - psi0.amplitudes).cwiseAbs().maxCoeff() < 1e-8);
    }
    SECTION("norm preserved") {
        auto psi = evolve(b, psi0, h, 2.13);
        CHECK(std::abs(psi.norm() - 1.0) < kTolNorm);
    }
    SECTION("non-Hermitian input rejected") {
        auto bad = collective_operator(b, Gen::Ep);
        CHECK_THROWS_AS(evolve(b, psi0, bad, 0.1), std::invalid_argument);
    }
}

TEST_CASE("revival at chi t = pi for even N, lab picture") {
    for (int n : {4, 8}) {
        FockBasis b(n);
        auto psi0 = initial_state(b);
        auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
        CHECK(fidelity(psi0, prop->apply(psi0, M_PI)) > 0.999);
    }
}

TEST_CASE("Krylov matches the dense path") {
    FockBasis b(6);
    auto psi0 = initial_state(b);
    auto h = hamiltonian(b, ModelParams{1.0, 6}, Picture::Interaction);
    PropagatorOptions dense_opt;
    dense_opt.force_method = PropagatorMethod::DenseEigen;
    PropagatorOptions krylov_opt;
    krylov_opt.force_method = PropagatorMethod::Krylov;
    Propagator pd(b, h, dense_opt), pk(b, h, krylov_opt);
    for (double t : {0.01, 0.5, 1.9, M_PI}) {
        auto a = pd.apply(psi0, t);
        auto c = pk.apply(psi0, t);
        CHECK((a.amplitudes - c.amplitudes).cwiseAbs().maxCoeff() < 1e-9);
    }
    // trajectory evaluation agrees as well
    std::vector<double> times{0.1, 0.2, 0.5, 1.0};
    auto pa = pd.apply_path(psi0, times);
    auto pb = pk.apply_path(psi0, times);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK((pa[i].amplitudes - pb[i].amplitudes).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("conserved quantities along a trajectory") {
    const int n = 12;
    FockBasis b(n);
    auto psi0 = initial_state(b);
    auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
    auto jz = collective_operator(b, Gen::Jz);
    auto kx = collective_operator(b, Gen::Kx);
    auto h = hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
    const double jz0 = expectation_real(psi0, jz);
    const double kx0 = expectation_real(psi0, kx);
    const double h0 = expectation_real(psi0, h);
    for (double t : {0.3, 1.1, 2.7, M_PI}) {
        auto psi = prop->apply(psi0, t);
        CHECK(std::abs(expectation_real(psi, jz) - jz0) < 1e-8);
        CHECK(std::abs(expectation_real(psi, kx) - kx0) < 1e-8);
        CHECK(std::abs(expectation_real(psi, h) - h0) < 1e-8);
        CHECK(std::abs(psi.norm() - 1.0) < kTolNorm);
    }
}

TEST_CASE("picture equivalence for Jz-invariant observables") {
    const int n = 8;
    FockBasis b(n);
    auto psi0 = initial_state(b);
    auto lab = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
    auto inter = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, Picture::Interaction);
    for (double t : {0.4, 1.3}) {
        auto pl = lab->apply(psi0, t);
        auto pi_ = inter->apply(psi0, t);
        for (Gen g : {Gen::Kz, Gen::Ky, Gen::Kx, Gen::Jz}) {
            auto op = collective_operator(b, g);
            CHECK(std::abs(expectation_real(pl, op) - expectation_real(pi_, op)) < 1e-8);
        }
    }
}

TEST_CASE("rotations") {
    FockBasis b(4);
    auto psi0 = initial_state(b);
    auto jz = collective_operator(b, Gen::Jz);

    SECTION("angle 0 is the identity") {
        auto r = apply_rotation(b, psi0, jz, 0.0);
        CHECK((r.amplitudes - psi0.amplitudes).norm() < 1e-14);
    }
    SECTION("2 pi rotation under Jz returns an even-N state up to phase") {
        auto r = apply_rotation(b, psi0, jz, 2 * M_PI);
        CHECK(std::abs(fidelity(psi0, r) - 1.0) < kTolNorm);
    }
    SECTION("non-Hermitian generator rejected") {
        auto ep = collective_operator(b, Gen::Ep);
        CHECK_THROWS_AS(apply_rotation(b, psi0, ep, 0.3), std::invalid_argument);
    }
    SECTION("rotation norm and composition") {
        auto jy = collective_operator(b, Gen::Jy);
        auto r1 = apply_rotation(b, apply_rotation(b, psi0, jy, 0.4), jy, 0.3);
        auto r2 = apply_rotation(b, psi0, jy, 0.7);
        CHECK((r1.amplitudes - r2.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("propagator cache reuses instances") {
    FockBasis b(4);
    auto p1 = PropagatorCache::hamiltonian(b, ModelParams{1.0, 4}, Picture::Lab);
    auto p2 = PropagatorCache::hamiltonian(b, ModelParams{1.0, 4}, Picture::Lab);
    CHECK(p1.get() == p2.get());
    auto p3 = PropagatorCache::hamiltonian(b, ModelParams{2.0, 4}, Picture::Lab);
    CHECK(p1.get() != p3.get());
}
