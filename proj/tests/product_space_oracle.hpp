#pragma once

// Independent brute-force oracle: builds collective operators and the
// Hamiltonian on the full 4^N product space from single-atom Pauli and
// momentum-flip matrices, together with the isometry onto the symmetric
// sector.  Everything here is constructed without the Schwinger-boson
// machinery, so agreement validates the second-quantization pipeline.

#include <Eigen/Dense>
#include <smsq/fock_basis.hpp>

#include <array>
#include <cmath>
#include <complex>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using smsq::Complex;

// single-atom basis order matches the Schwinger modes:
// |e,+1>, |g,-1>, |e,-1>, |g,+1>
inline Mat single_atom(const char* which) {
    Mat m = Mat::Zero(4, 4);
    const std::string w = which;
    if (w == "sigma_p") {           // |e><g| (x) 1_momentum
        m(0, 3) = 1;                // |g,+1> -> |e,+1>
        m(2, 1) = 1;                // |g,-1> -> |e,-1>
    } else if (w == "s_x") {        // momentum flip (x) 1_internal
        m(0, 2) = m(2, 0) = 1;      // |e,+1> <-> |e,-1>
        m(1, 3) = m(3, 1) = 1;      // |g,-1> <-> |g,+1>
    } else if (w == "sigma_z") {
        m(0, 0) = m(2, 2) = 1;
        m(1, 1) = m(3, 3) = -1;
    } else if (w == "s_z") {
        m(0, 0) = m(3, 3) = 1;
        m(1, 1) = m(2, 2) = -1;
    } else {
        throw std::invalid_argument("unknown single-atom operator");
    }
    return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Mat embed_at(const Mat& op, int atom, int n_atoms) {
    Mat out = Mat::Identity(1, 1);
    for (int j = 0; j < n_atoms; ++j)
        out = kron(out, j == atom ? op : Mat::Identity(4, 4));
    return out;
}

inline Mat collective(const char* which, int n_atoms) {
    const Mat op = single_atom(which);
    Mat sum = Mat::Zero(Eigen::Index(std::pow(4, n_atoms)), Eigen::Index(std::pow(4, n_atoms)));
    for (int j = 0; j < n_atoms; ++j) sum += embed_at(op, j, n_atoms);
    return sum;
}

/// H = chi sum_{i,j} s_i^x s_j^x sigma_i^+ sigma_j^-, which factorizes as
/// chi (sum_i A_i)(sum_j A_j)^dag with A = sigma^+ s^x per atom.
inline Mat hamiltonian_product_space(int n_atoms, double chi = 1.0) {
    const Mat a = single_atom("sigma_p") * single_atom("s_x");
    Mat sum = Mat::Zero(Eigen::Index(std::pow(4, n_atoms)), Eigen::Index(std::pow(4, n_atoms)));
    for (int j = 0; j < n_atoms; ++j) sum += embed_at(a, j, n_atoms);
    return chi * sum * sum.adjoint();
}

/// Isometry P: symmetric Fock sector -> product space, with the multinomial
/// normalization.  Columns follow the FockBasis canonical order.
inline Mat symmetrizer(const smsq::FockBasis& basis) {
    const int n = basis.n_atoms();
    const auto dim_prod = Eigen::Index(std::pow(4, n));
    Mat p = Mat::Zero(dim_prod, Eigen::Index(basis.size()));
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index row = 0; row < dim_prod; ++row) {
        Eigen::Index r = row;
        std::array<int, 4> counts{};
        for (int j = n - 1; j >= 0; --j) {
            assign[static_cast<std::size_t>(j)] = int(r % 4);
            counts[static_cast<std::size_t>(r % 4)] += 1;
            r /= 4;
        }
        const auto col = static_cast<Eigen::Index>(
            basis.index_of(smsq::FockState{{counts[0], counts[1], counts[2], counts[3]}}));
        p(row, col) = 1.0;
    }
    for (Eigen::Index c = 0; c < p.cols(); ++c) p.col(c) /= p.col(c).norm();
    return p;
}

}  // namespace oracle
