#include <catch2/catch_amalgamated.hpp>
#include <smsq/su4_algebra.hpp>

#include <sstream>

#include "product_space_oracle.hpp"

using namespace smsq;

namespace {
constexpr double kTolAlg = 1e-12;

double entry(const SpMat& m, int r, int c) { return m.coeff(r, c).real(); }
}  // namespace

TEST_CASE("bilinears carry bosonic matrix elements") {
    FockBasis b(2);
    // a^dag b on (0,2,0,0): annihilate b (sqrt 2), create a (sqrt 1) -> (1,1,0,0)
    auto adag_b = bilinear_operator(b, Mode::A, Mode::B);
    const auto row = int(b.index_of(FockState{{1, 1, 0, 0}}));
    const auto col = int(b.index_of(FockState{{0, 2, 0, 0}}));
    CHECK(entry(adag_b.mat, row, col) == Catch::Approx(std::sqrt(2.0)));

    // annihilator of an empty mode contributes a zero column
    const auto empty_col = int(b.index_of(FockState{{2, 0, 0, 0}}));
    for (int r = 0; r < int(b.size()); ++r) CHECK(entry(adag_b.mat, r, empty_col) == 0.0);
}

TEST_CASE("bilinears equal products of mode transfer matrices") {
    // a^dag b over the N basis == (create a: N-1 -> N) * (annihilate b: N -> N-1)
    for (int n : {1, 2, 4}) {
        FockBasis b(n);
        SpMat direct = bilinear_operator(b, Mode::A, Mode::B).mat;
        SpMat create_a = detail::mode_transfer(FockBasis(std::max(n - 1, 1)), Mode::A,
                                               LadderKind::Create);
        SpMat ann_b = detail::mode_transfer(b, Mode::B, LadderKind::Annihilate);
        if (n == 1) {
            // N=1 annihilation lands in the vacuum row; composite via vacuum is 1x1
            continue;
        }
        SpMat composite = SpMat(create_a * ann_b);
        CHECK(max_abs(SpMat(direct - composite)) < kTolAlg);
    }
}

TEST_CASE("single-excitation transfer amplitudes") {
    // within the number-conserving composite a^dag b: |0,1,0,0> -> |1,0,0,0> with amplitude 1
    FockBasis b(1);
    auto adag_b = bilinear_operator(b, Mode::A, Mode::B);
    CHECK(entry(adag_b.mat, 0, 1) == Catch::Approx(1.0));
}

TEST_CASE("diagonal collective operators") {
    FockBasis b(1);
    auto jz = collective_operator(b, Gen::Jz);
    CHECK(entry(jz.mat, 0, 0) == Catch::Approx(0.5));   // (1,0,0,0)
    CHECK(entry(jz.mat, 1, 1) == Catch::Approx(-0.5));  // (0,1,0,0)
    auto kz = collective_operator(b, Gen::Kz);
    CHECK(entry(kz.mat, 0, 0) == Catch::Approx(0.5));
    CHECK(entry(kz.mat, 1, 1) == Catch::Approx(-0.5));

    CHECK_THROWS_AS(collective_operator(b, Gen::HLab), std::invalid_argument);
}

TEST_CASE("su(2) relations and cross commutators") {
    for (int n : {2, 3}) {
        FockBasis b(n);
        auto rep = verify_algebra(b);
        INFO("N = " << n);
        for (const auto& e : rep.entries) {
            INFO(e.identity);
            CHECK(e.residual <= kTolAlg);
        }
        CHECK(rep.all_within_tol());
    }
}

TEST_CASE("corrupted generator is detected") {
    // flipping one term of Km must break [Kp,Km] = 2Kz well beyond tolerance
    FockBasis b(2);
    SpMat km_bad = SpMat(detail::move_op(b, Mode::C, Mode::A) - detail::move_op(b, Mode::B, Mode::D));
    SpMat kp = collective_operator(b, Gen::Kp).mat;
    SpMat kz = collective_operator(b, Gen::Kz).mat;
    const double resid = max_abs(SpMat(commutator(kp, km_bad) - SpMat(2.0 * kz)));
    CHECK(resid > 1e-3);
}

TEST_CASE("Hamiltonian identities") {
    ModelParams params{1.0, 1};
    FockBasis b1(1);
    auto h1 = hamiltonian(b1, params, Picture::Lab);
    // H|e,+1> = chi |e,+1>, H|g,-1> = 0
    CHECK(entry(h1.mat, 0, 0) == Catch::Approx(1.0));
    for (int r = 0; r < 4; ++r) CHECK(entry(h1.mat, r, 1) == 0.0);

    for (int n = 1; n <= 6; ++n) {
        FockBasis b(n);
        ModelParams p{0.7, n};
        SpMat hlab = hamiltonian(b, p, Picture::Lab).mat;
        SpMat hint = hamiltonian(b, p, Picture::Interaction).mat;
        SpMat jz = collective_operator(b, Gen::Jz).mat;
        SpMat e2 = collective_operator(b, Gen::E2).mat;
        CHECK(max_abs(SpMat(hlab - SpMat(p.chi * SpMat(e2 - SpMat(jz * jz) + jz)))) < kTolAlg);
        CHECK(max_abs(SpMat(hint - SpMat(hlab - SpMat(p.chi * jz)))) < kTolAlg);
    }
    CHECK_THROWS_AS(hamiltonian(b1, ModelParams{-1.0, 1}, Picture::Lab), std::invalid_argument);
}

TEST_CASE("Hermiticity of observable labels") {
    FockBasis b(4);
    for (Gen g : {Gen::Jx, Gen::Jy, Gen::Jz, Gen::Kx, Gen::Ky, Gen::Kz, Gen::E2, Gen::Ne, Gen::Ng,
                  Gen::Np1, Gen::Nm1})
        CHECK(collective_operator(b, g).is_hermitian(kTolAlg));
    CHECK(hamiltonian(b, ModelParams{1.0, 4}, Picture::Lab).is_hermitian(kTolAlg));
    CHECK(hamiltonian(b, ModelParams{1.0, 4}, Picture::Interaction).is_hermitian(kTolAlg));
    // ladder pairs are mutual adjoints
    for (auto [up, dn] : {std::pair{Gen::Jp, Gen::Jm}, {Gen::Kp, Gen::Km}, {Gen::Ep, Gen::Em}}) {
        SpMat diff = SpMat(collective_operator(b, up).mat -
                           adjoint_of(collective_operator(b, dn).mat));
        CHECK(max_abs(diff) < kTolAlg);
    }
}

TEST_CASE("Casimir shell spectrum") {
    // eigenvalues of E2 are e(e+1), e in {N/2, N/2-1, ...}
    for (int n = 1; n <= 6; ++n) {
        FockBasis b(n);
        DenseMat e2 = DenseMat(collective_operator(b, Gen::E2).mat);
        Eigh es = eigh(e2);
        for (Eigen::Index i = 0; i < es.evals.size(); ++i) {
            double best = 1e300;
            for (double e = 0.5 * n; e >= -0.25; e -= 1.0)
                best = std::min(best, std::abs(es.evals[i] - e * (e + 1)));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("operators match the product-space oracle at small N") {
    for (int n : {1, 2, 3}) {
        FockBasis b(n);
        const oracle::Mat p = oracle::symmetrizer(b);
        auto check = [&](const SpMat& schwinger, const oracle::Mat& prod, const char* tag) {
            INFO(tag << " N=" << n);
            // the product operator must preserve the symmetric sector
            const oracle::Mat leak =
                (oracle::Mat::Identity(p.rows(), p.rows()) - p * p.adjoint()) * prod * p;
            CHECK(leak.cwiseAbs().maxCoeff() < 1e-10);
            const oracle::Mat projected = p.adjoint() * prod * p;
            CHECK((projected - DenseMat(schwinger)).cwiseAbs().maxCoeff() < 1e-10);
        };
        check(collective_operator(b, Gen::Jz).mat, 0.5 * oracle::collective("sigma_z", n), "Jz");
        check(collective_operator(b, Gen::Kz).mat, 0.5 * oracle::collective("s_z", n), "Kz");
        const oracle::Mat sp = oracle::collective("sigma_p", n);
        check(collective_operator(b, Gen::Jx).mat, 0.5 * (sp + sp.adjoint()), "Jx");
        const oracle::Mat kx2 = oracle::collective("s_x", n);
        check(collective_operator(b, Gen::Kx).mat, 0.5 * kx2, "Kx");
        check(hamiltonian(b, ModelParams{1.0, n}, Picture::Lab).mat,
              oracle::hamiltonian_product_space(n), "H_lab");
    }
}

TEST_CASE("triplet export format") {
    FockBasis b(1);
    auto jz = collective_operator(b, Gen::Jz);
    std::ostringstream os;
    write_operator_triplets(os, jz);
    const std::string text = os.str();
    CHECK(text.find("schema=smsq.operator.v1") != std::string::npos);
    CHECK(text.find("n_atoms=1 label=Jz") != std::string::npos);
    CHECK(text.find("row,col,re,im") != std::string::npos);
    CHECK(text.find("0,0,0.5,0") != std::string::npos);
}
