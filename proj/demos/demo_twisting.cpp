// Minimal tour of the library: build the N-atom model, evolve the polarized
// product state under the twisting Hamiltonian, and watch the QFIM diagonals
// grow toward Heisenberg scaling while the J-K covariance rises and falls.

#include <smsq/smsq.hpp>

#include <cstdio>

using namespace smsq;

int main() {
    const int n = 16;
    FockBasis basis(n);
    std::printf("N = %d atoms, basis dimension %zu\n\n", n, basis.size());

    auto algebra = verify_algebra(basis);
    std::printf("algebra self-check: max residual %.2e over %zu identities\n\n",
                algebra.max_residual(), algebra.entries.size());

    auto prop = PropagatorCache::hamiltonian(basis, ModelParams{1.0, n}, Picture::Lab);
    auto gens = six_generators(basis);
    const auto psi0 = initial_state(basis);

    std::printf("%8s %10s %10s %10s %10s\n", "chi t", "F11/N^2", "F66/N^2", "F16/N^2", "p_top");
    for (double t : {0.0, 0.1, std::pow(double(n), -0.4), 0.5, M_PI / 4, M_PI / 2, M_PI}) {
        const auto psi = prop->apply(psi0, t);
        const auto f = qfim(psi, gens, t);
        std::printf("%8.4f %10.4f %10.4f %10.4f %10.6f\n", t, f.matrix(0, 0) / (n * n),
                    f.matrix(5, 5) / (n * n), f.matrix(0, 5) / (n * n),
                    k_top_probability(basis, psi));
    }
    std::printf("\nthe covariance peaks near chi t = N^(-2/5) = %.4f, vanishes at pi/2,\n"
                "and the state revives at chi t = pi\n",
                std::pow(double(n), -0.4));
    return 0;
}
