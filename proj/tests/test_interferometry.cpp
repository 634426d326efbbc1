#include <catch2/catch_amalgamated.hpp>
#include <smsq/interferometry.hpp>
#include <smsq/io.hpp>
#include <smsq/sweep.hpp>

using namespace smsq;

TEST_CASE("config validation") {
    SchemeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.effective_tau() == Catch::Approx(M_PI / 4));
    cfg.scheme = Scheme::Auxiliary;
    CHECK(cfg.effective_tau() == Catch::Approx(std::pow(20.0, -0.4)));
    cfg.n_measurements = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_measurements = 10;
    cfg.grid_points = 50;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.grid_points = 51;
    cfg.phi3 = 4.0;  // outside the prior domain
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("signal encoding") {
    const int n = 6;
    FockBasis b(n);
    auto psi0 = initial_state(b);

    SECTION("zero phases are the identity") {
        auto s = encode_signal(b, psi0, 0.0, 0.0);
        CHECK((s.amplitudes - psi0.amplitudes).norm() < 1e-13);
    }
    SECTION("commuting split") {
        const double p3 = 0.21, p5 = -0.47;
        auto ky = collective_operator(b, Gen::Ky);
        auto jz = collective_operator(b, Gen::Jz);
        auto a = encode_signal(b, psi0, p3, p5);
        auto c = apply_rotation(b, apply_rotation(b, psi0, jz, p3), ky, p5);
        CHECK((a.amplitudes - c.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("probe preparation") {
    const int n = 10;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    auto probe = prepare_probe(b, cfg);
    CHECK(std::abs(probe.state.norm() - 1.0) < kTolNorm);
    CHECK_FALSE(probe.theta_flat);
    auto F = qfim(probe.state, six_generators(b));
    // after the Jx rotation the maximal J fluctuation sits in Jz (Fig. 6 fit, +-15%)
    const double f33_fit = 0.3815 * n * n + 0.1577 * n;
    CHECK(F.matrix(2, 2) > 0.85 * f33_fit);
    CHECK(F.matrix(2, 2) < 1.15 * f33_fit);
    // Ky carries the largest transverse K fluctuation, matching the F55 fit
    const double f55_fit = 0.2512 * n * n + 0.8727 * n;
    CHECK(F.matrix(4, 4) > 0.85 * f55_fit);
    CHECK(F.matrix(4, 4) < 1.15 * f55_fit);
    CHECK(F.matrix(4, 4) > F.matrix(3, 3));  // Ky beats the conserved Kx
}

TEST_CASE("sampling is deterministic and converges") {
    const int n = 4;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    auto dist = L.distribution(M_PI / 16, M_PI / 16);

    auto r1 = sample_measurements(dist, 1000, 42);
    auto r2 = sample_measurements(dist, 1000, 42);
    CHECK(r1.outcome_bins == r2.outcome_bins);
    auto r3 = sample_measurements(dist, 1000, 43);
    CHECK(r1.outcome_bins != r3.outcome_bins);

    // deterministic single-outcome distribution
    OutcomeDistribution delta;
    delta.n_atoms = n;
    delta.probs = Eigen::ArrayXd::Zero((n + 1) * (n + 1));
    delta.probs[7] = 1.0;
    auto rd = sample_measurements(delta, 50, 7);
    for (int o : rd.outcome_bins) CHECK(o == 7);

    // empirical frequencies: total-variation distance < 5/sqrt(M) at M = 1e5
    const int m = 100000;
    auto rec = sample_measurements(dist, m, 123);
    Eigen::ArrayXd freq = Eigen::ArrayXd::Zero(dist.probs.size());
    for (int o : rec.outcome_bins) freq[o] += 1.0 / m;
    const double tv = 0.5 * (freq - dist.probs).abs().sum();
    CHECK(tv < 5.0 / std::sqrt(double(m)));
}

TEST_CASE("flat posterior with zero measurements") {
    const int n = 4;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    MeasurementRecord empty;
    empty.n_atoms = n;
    auto post = bayesian_update(empty, L, 51);
    const double flat = 1.0 / (4 * M_PI * M_PI);
    CHECK((post.density.array() - flat).abs().maxCoeff() < 1e-12);
    auto stats = posterior_stats(post);
    CHECK(stats.sigma3 == Catch::Approx(2 * M_PI / std::sqrt(12.0)).epsilon(1e-3));
    CHECK(stats.sigma5 == Catch::Approx(2 * M_PI / std::sqrt(12.0)).epsilon(1e-3));
    CHECK(std::abs(stats.mean3) < 1e-10);
}

TEST_CASE("posterior normalization and likelihood consistency") {
    const int n = 6;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    cfg.grid_points = 51;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    auto dist = L.distribution(cfg.phi3, cfg.phi5);
    // the sampling distribution and the bayesian likelihood are the same object
    auto again = L.distribution(cfg.phi3, cfg.phi5);
    CHECK((dist.probs - again.probs).abs().maxCoeff() < 1e-12);

    auto rec = sample_measurements(dist, 200, 11);
    auto post = bayesian_update(rec, L, cfg.grid_points);
    const double cell = (2 * M_PI / cfg.grid_points) * (2 * M_PI / cfg.grid_points);
    CHECK(post.density.sum() * cell == Catch::Approx(1.0).margin(1e-6));
    CHECK(post.density.minCoeff() >= 0.0);
}

TEST_CASE("single measurement barely updates the posterior") {
    const int n = 6;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    auto rec = sample_measurements(L.distribution(cfg.phi3, cfg.phi5), 1, 3);
    auto stats = posterior_stats(bayesian_update(rec, L, 51));
    const double flat_sigma = 2 * M_PI / std::sqrt(12.0);
    CHECK(stats.sigma3 > 0.5 * flat_sigma);
    CHECK(stats.sigma5 > 0.5 * flat_sigma);
}

TEST_CASE("posterior concentrates at the phase magnitudes") {
    // the outcome distribution is exactly even in each phase, so the posterior
    // is parity-multimodal; the refined mode must land at |phi| regardless
    const int n = 8;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    cfg.n_measurements = 800;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    auto dist = L.distribution(cfg.phi3, cfg.phi5);
    int hits = 0;
    for (int seed = 0; seed < 5; ++seed) {
        auto rec = sample_measurements(dist, cfg.n_measurements, mix_seed(cfg.rng_seed, seed));
        auto post = bayesian_update(rec, L, 101);
        auto local = refine_posterior_mode(rec, L, post);
        if (std::abs(std::abs(local.mode3) - cfg.phi3) < 3 * local.sigma3 + 1e-3 &&
            std::abs(std::abs(local.mode5) - cfg.phi5) < 3 * local.sigma5 + 1e-3)
            ++hits;
    }
    CHECK(hits >= 4);
}

TEST_CASE("parity of the joint distribution") {
    const int n = 8;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    auto probe = prepare_probe(b, cfg);
    TwoParamLikelihood L(b, probe.state);
    auto base = L.distribution(cfg.phi3, cfg.phi5);
    CHECK((L.distribution(-cfg.phi3, cfg.phi5).probs - base.probs).abs().maxCoeff() < 1e-12);
    CHECK((L.distribution(cfg.phi3, -cfg.phi5).probs - base.probs).abs().maxCoeff() < 1e-12);
}

TEST_CASE("auxiliary scheme at small N") {
    const int n = 8;
    FockBasis b(n);
    SchemeConfig cfg;
    cfg.n_atoms = n;
    cfg.scheme = Scheme::Auxiliary;
    cfg.phi1_scan_points = 101;
    auto r = auxiliary_scheme(b, cfg);
    CHECK(r.p_at_zero == Catch::Approx(1.0).margin(kTolNorm));
    CHECK(r.max_even_deviation < 0.05);  // approximately even (measured ~1e-2)
    CHECK(r.gaussian_fit.converged);
    CHECK(r.sigma_fid > 0.0);
    CHECK(r.gaussian_fit.coefficients[2] >= 0.0);  // offset stays a probability
    CHECK(r.direct_bound.value > 0.0);
    CHECK(r.direct_bound.eval_phi > 0.0);
    // every scan value is a probability
    for (auto& [phi, p] : r.curve) {
        CHECK(p >= -1e-12);
        CHECK(p <= 1.0 + 1e-12);
    }
    // full time reversal at phi1 = 0 reproduces the initial state
    auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, cfg.picture);
    auto psi0 = initial_state(b);
    auto echo = prop->apply(prop->apply(psi0, r.tau), -r.tau);
    CHECK(fidelity(psi0, echo) > 1.0 - 1e-9);
}

TEST_CASE("seed mixing and rng determinism") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    Xoshiro256 a(99), c(99);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == c.next());
    Xoshiro256 d(99);
    double u = d.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
}

TEST_CASE("parallel sweep is deterministic") {
    std::vector<double> serial(200), parallel(200);
    parallel_for(200, 1, [&](std::size_t i) { serial[i] = std::sqrt(double(i)) + i; });
    parallel_for(200, 4, [&](std::size_t i) { parallel[i] = std::sqrt(double(i)) + i; });
    CHECK(serial == parallel);
}

TEST_CASE("io helpers") {
    CHECK(g17(0.1) == "0.10000000000000001");
    CHECK(std::stod(g17(M_PI)) == M_PI);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}
