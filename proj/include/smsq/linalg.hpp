#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#ifdef SMSQ_HAVE_LAPACKE
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

namespace smsq {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using DenseMat = Eigen::MatrixXcd;
// compressed-row storage; makeCompressed() keeps column indices sorted
using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline SpMat adjoint_of(const SpMat& a) {
    SpMat r = SpMat(a.adjoint());
    r.makeCompressed();
    return r;
}

inline double max_abs(const SpMat& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

inline double hermiticity_defect(const SpMat& a) {
    SpMat d = a - SpMat(a.adjoint());
    return max_abs(d);
}

inline SpMat commutator(const SpMat& a, const SpMat& b) {
    SpMat r = SpMat(a * b) - SpMat(b * a);
    r.prune(0.0, 0.0);
    r.makeCompressed();
    return r;
}

struct Eigh {
    RealVec evals;
    DenseMat evecs;  // columns
};

/// Hermitian eigendecomposition of a dense matrix (zheevd when available).
inline Eigh eigh(DenseMat a) {
    const auto n = a.rows();
    Eigh out;
    out.evals.resize(n);
#ifdef SMSQ_HAVE_LAPACKE
    if (n > 0) {
        int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                  a.data(), static_cast<lapack_int>(n), out.evals.data());
        if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
        out.evecs = std::move(a);
        return out;
    }
#endif
    Eigen::SelfAdjointEigenSolver<DenseMat> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    out.evals = es.eigenvalues();
    out.evecs = es.eigenvectors();
    return out;
}

/// Eigendecomposition of a Hermitian matrix that is block diagonal over
/// integer sector labels (a conserved diagonal quantum number).
struct SectorBlock {
    std::vector<int> idx;  // basis indices of this sector, ascending
    RealVec evals;
    DenseMat evecs;
};

struct SectorEigh {
    std::vector<SectorBlock> blocks;
    Eigen::Index dim = 0;

    /// out = exp(-i A t) in
    void apply_exp(double t, const Vec& in, Vec& out) const {
        out.setZero(dim);
        Vec g, h;
        for (const auto& b : blocks) {
            const auto m = static_cast<Eigen::Index>(b.idx.size());
            g.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) g[i] = in[b.idx[i]];
            h.noalias() = b.evecs.adjoint() * g;
            h.array() *= (Complex(0, -t) * b.evals.array().cast<Complex>()).exp();
            g.noalias() = b.evecs * h;
            for (Eigen::Index i = 0; i < m; ++i) out[b.idx[i]] = g[i];
        }
    }

    /// Dense unitary exp(-i A t); zero outside the sector blocks.
    DenseMat exp_dense(double t) const {
        DenseMat u = DenseMat::Zero(dim, dim);
        for (const auto& b : blocks) {
            const auto m = static_cast<Eigen::Index>(b.idx.size());
            DenseMat phases = (b.evecs.array().rowwise() *
                               (Complex(0, -t) * b.evals.transpose().array().cast<Complex>()).exp())
                                  .matrix();
            DenseMat blk = phases * b.evecs.adjoint();
            for (Eigen::Index j = 0; j < m; ++j)
                for (Eigen::Index i = 0; i < m; ++i) u(b.idx[i], b.idx[j]) = blk(i, j);
        }
        return u;
    }

    double min_eval() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks)
            if (b.evals.size() > 0) m = std::min(m, b.evals.minCoeff());
        return m;
    }
};

/// True when every nonzero of `a` stays within one sector.
inline bool respects_sectors(const SpMat& a, std::span<const int> sector_ids) {
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            if (sector_ids[static_cast<std::size_t>(it.row())] !=
                sector_ids[static_cast<std::size_t>(it.col())])
                if (std::abs(it.value()) > 0.0) return false;
    return true;
}

inline SectorEigh sector_eigh(const SpMat& a, std::span<const int> sector_ids) {
    const auto n = a.rows();
    int max_id = 0;
    for (int s : sector_ids) max_id = std::max(max_id, s);
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(max_id) + 1);
    for (Eigen::Index i = 0; i < n; ++i)
        groups[static_cast<std::size_t>(sector_ids[static_cast<std::size_t>(i)])].push_back(
            static_cast<int>(i));

    SectorEigh out;
    out.dim = n;
    for (auto& g : groups) {
        if (g.empty()) continue;
        const auto m = static_cast<Eigen::Index>(g.size());
        DenseMat blk = DenseMat::Zero(m, m);
        std::unordered_map<int, Eigen::Index> pos;
        pos.reserve(g.size());
        for (Eigen::Index i = 0; i < m; ++i) pos[g[static_cast<std::size_t>(i)]] = i;
        for (Eigen::Index i = 0; i < m; ++i) {
            const int row = g[static_cast<std::size_t>(i)];
            for (SpMat::InnerIterator it(a, row); it; ++it) {
                auto p = pos.find(static_cast<int>(it.col()));
                if (p != pos.end()) blk(i, p->second) = it.value();
            }
        }
        Eigh e = eigh(std::move(blk));
        out.blocks.push_back(SectorBlock{std::move(g), std::move(e.evals), std::move(e.evecs)});
    }
    return out;
}

}  // namespace smsq
