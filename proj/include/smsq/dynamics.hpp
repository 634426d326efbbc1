#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>

#include "fock_basis.hpp"
#include "linalg.hpp"
#include "su4_algebra.hpp"

namespace smsq {

constexpr double kTolNorm = 1e-10;

/// Normalized amplitude vector over a FockBasis.
struct StateVector {
    int basis_n = 0;
    Vec amplitudes;

    double norm() const { return amplitudes.norm(); }
};

/// |psi_0> = |+>^N (x) |+1>^N: binomial amplitudes on the (alpha,0,0,delta) states.
inline StateVector initial_state(const FockBasis& b) {
    const int n = b.n_atoms();
    StateVector s;
    s.basis_n = n;
    s.amplitudes = Vec::Zero(static_cast<Eigen::Index>(b.size()));
    // sqrt(C(N,alpha)) / 2^{N/2}, built by recurrence to avoid overflow
    double log_half_n = -0.5 * n * std::log(2.0);
    for (int a = 0; a <= n; ++a) {
        double log_c = 0.0;
        for (int i = 0; i < a; ++i) log_c += std::log(double(n - i)) - std::log(double(i + 1));
        FockState st{{a, 0, 0, n - a}};
        s.amplitudes[static_cast<Eigen::Index>(b.index_of(st))] =
            Complex(std::exp(0.5 * log_c + log_half_n), 0.0);
    }
    return s;
}

inline std::vector<int> excited_sector_ids(const FockBasis& b) {
    std::vector<int> ids(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) ids[i] = b.state(i).n_excited();
    return ids;
}

inline std::vector<int> momentum_sector_ids(const FockBasis& b) {
    std::vector<int> ids(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) ids[i] = b.state(i).n_plus();
    return ids;
}

enum class PropagatorMethod { DenseEigen, Krylov };

/// Applies exp(-i H t). Dense spectral path below the dimension cutoff
/// (blocked over a conserved diagonal quantum number when one exists),
/// Lanczos stepping above it. Immutable and shareable once built.
struct PropagatorOptions {
    Eigen::Index dense_dim_limit = 4096;
    double krylov_step = 0.01;  // in units of 1/chi when H = chi * (...)
    int krylov_dim = 30;
    double tol_prop = 1e-10;
    std::optional<PropagatorMethod> force_method;
};

class Propagator {
  public:
    Propagator(const FockBasis& basis, OperatorMatrix op, PropagatorOptions opt = {})
        : op_(std::move(op)), opt_(opt) {
        if (op_.basis_n != basis.n_atoms() ||
            op_.mat.rows() != static_cast<Eigen::Index>(basis.size()))
            throw std::invalid_argument("Propagator: operator/basis mismatch");
        const double scale = std::max(1.0, max_abs(op_.mat));
        if (hermiticity_defect(op_.mat) > 1e-9 * scale)
            throw std::invalid_argument("Propagator: operator is not Hermitian");
        method_ = opt.force_method.value_or(op_.mat.rows() <= opt.dense_dim_limit
                                                ? PropagatorMethod::DenseEigen
                                                : PropagatorMethod::Krylov);
        if (method_ == PropagatorMethod::DenseEigen) {
            const auto ne = excited_sector_ids(basis);
            const auto np = momentum_sector_ids(basis);
            std::vector<int> trivial(basis.size(), 0);
            if (respects_sectors(op_.mat, ne))
                spectral_ = sector_eigh(op_.mat, ne);
            else if (respects_sectors(op_.mat, np))
                spectral_ = sector_eigh(op_.mat, np);
            else
                spectral_ = sector_eigh(op_.mat, trivial);  // single full block
        }
    }

    PropagatorMethod method() const { return method_; }
    const OperatorMatrix& op() const { return op_; }

    StateVector apply(const StateVector& in, double t) const {
        if (in.amplitudes.size() != op_.mat.rows())
            throw std::invalid_argument("Propagator: state dimension mismatch");
        StateVector out;
        out.basis_n = in.basis_n;
        if (method_ == PropagatorMethod::DenseEigen) {
            spectral_.apply_exp(t, in.amplitudes, out.amplitudes);
        } else {
            out.amplitudes = krylov_propagate(in.amplitudes, t);
        }
        return out;
    }

    /// States at a sorted, ascending list of times (trajectory evaluation).
    std::vector<StateVector> apply_path(const StateVector& in, std::span<const double> times) const {
        std::vector<StateVector> out;
        out.reserve(times.size());
        if (method_ == PropagatorMethod::DenseEigen) {
            for (double t : times) out.push_back(apply(in, t));
        } else {
            StateVector cur = in;
            double t_cur = 0.0;
            for (double t : times) {
                cur.amplitudes = krylov_propagate(cur.amplitudes, t - t_cur);
                t_cur = t;
                out.push_back(cur);
            }
        }
        return out;
    }

    /// Dense unitary exp(-i H t); only meaningful on the dense path.
    DenseMat dense_unitary(double t) const {
        if (method_ != PropagatorMethod::DenseEigen)
            throw std::logic_error("dense_unitary requires the dense-eigen path");
        return spectral_.exp_dense(t);
    }

  private:
    Vec krylov_propagate(const Vec& v0, double t) const {
        Vec v = v0;
        if (t == 0.0) return v;
        const double step = opt_.krylov_step;
        const long nsteps = std::max(1L, long(std::ceil(std::abs(t) / step)));
        const double dt = t / double(nsteps);
        for (long s = 0; s < nsteps; ++s) v = krylov_step(v, dt, 0);
        return v;
    }

    Vec krylov_step(const Vec& v0, double dt, int depth) const {
        if (depth > 40) throw std::runtime_error("Krylov propagation did not converge");
        const double beta0 = v0.norm();
        if (beta0 == 0.0) return v0;
        const int m = opt_.krylov_dim;
        const auto n = v0.size();
        DenseMat V(n, m);
        Eigen::VectorXd alpha(m), beta(m);  // beta[j] = subdiagonal after column j
        V.col(0) = v0 / beta0;
        int used = m;
        bool breakdown = false;
        for (int j = 0; j < m; ++j) {
            Vec w = op_.mat * V.col(j);
            // full reorthogonalization; subspace is small
            for (int i = 0; i <= j; ++i) {
                const Complex h = V.col(i).dot(w);
                w -= h * V.col(i);
                if (i == j) alpha[j] = h.real();
            }
            for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
            const double b = w.norm();
            beta[j] = b;
            if (b < 1e-13) {  // happy breakdown: subspace is invariant
                used = j + 1;
                breakdown = true;
                break;
            }
            if (j + 1 < m) V.col(j + 1) = w / b;
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
        for (int j = 0; j < used; ++j) {
            T(j, j) = alpha[j];
            if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        Vec e1 = Vec::Zero(used);
        e1[0] = 1.0;
        Vec small = es.eigenvectors().cast<Complex>() *
                    ((Complex(0, -dt) * es.eigenvalues().array().cast<Complex>()).exp() *
                     (es.eigenvectors().transpose().cast<Complex>() * e1).array())
                        .matrix();
        if (!breakdown) {
            const double resid = beta[used - 1] * std::abs(small[used - 1]);
            if (resid > opt_.tol_prop) {
                Vec half = krylov_step(v0, dt / 2, depth + 1);
                return krylov_step(half, dt / 2, depth + 1);
            }
        }
        return beta0 * (V.leftCols(used) * small);
    }

    OperatorMatrix op_;
    PropagatorOptions opt_;
    PropagatorMethod method_ = PropagatorMethod::DenseEigen;
    SectorEigh spectral_;
};

/// exp(-i H t) |state>, t in units of 1/chi when H carries chi.
inline StateVector evolve(const FockBasis& basis, const StateVector& state,
                          const OperatorMatrix& h, double t,
                          PropagatorOptions opt = {}) {
    return Propagator(basis, h, opt).apply(state, t);
}

/// exp(-i angle G) |state> for a Hermitian generator.
inline StateVector apply_rotation(const FockBasis& basis, const StateVector& state,
                                  const OperatorMatrix& generator, double angle) {
    return Propagator(basis, generator).apply(state, angle);
}

/// Process-wide cache of propagators, keyed per (N, picture, chi) for the
/// Hamiltonian and per (N, label) for rotation generators. Thread safe;
/// cached objects are immutable.
class PropagatorCache {
  public:
    static std::shared_ptr<const Propagator> hamiltonian(const FockBasis& basis,
                                                         const ModelParams& params,
                                                         Picture picture) {
        auto& self = instance();
        char key[64];
        std::snprintf(key, sizeof key, "H|%d|%d|%.17g", basis.n_atoms(), int(picture), params.chi);
        return self.get(key, [&] {
            return std::make_shared<const Propagator>(basis, smsq::hamiltonian(basis, params, picture));
        });
    }

    static std::shared_ptr<const Propagator> generator(const FockBasis& basis, Gen label) {
        auto& self = instance();
        char key[64];
        std::snprintf(key, sizeof key, "G|%d|%d", basis.n_atoms(), int(label));
        return self.get(key, [&] {
            return std::make_shared<const Propagator>(basis, collective_operator(basis, label));
        });
    }

    static void clear() {
        auto& self = instance();
        std::lock_guard<std::mutex> lk(self.mu_);
        self.map_.clear();
    }

  private:
    static PropagatorCache& instance() {
        static PropagatorCache c;
        return c;
    }

    template <typename F>
    std::shared_ptr<const Propagator> get(const std::string& key, F&& make) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        auto value = make();  // built outside the lock; duplicate builds are harmless
        std::lock_guard<std::mutex> lk(mu_);
        auto [it, inserted] = map_.emplace(key, std::move(value));
        return it->second;
    }

    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const Propagator>> map_;
};

inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

}  // namespace smsq
