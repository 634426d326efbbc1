#pragma once

#include <array>
#include <functional>
#include <string>

#include "dynamics.hpp"
#include "fock_basis.hpp"
#include "su4_algebra.hpp"

namespace smsq {

constexpr double kTolProb = 1e-9;
constexpr double kCfiProbFloor = 1e-14;  // outcomes below this are excluded from CFI sums
constexpr double kFdStep = 1e-5;         // finite-difference step for log-derivatives

inline Complex expectation(const StateVector& psi, const OperatorMatrix& op) {
    if (psi.amplitudes.size() != op.mat.rows())
        throw std::invalid_argument("expectation: dimension mismatch");
    return psi.amplitudes.dot(op.mat * psi.amplitudes);
}

/// <psi|A|psi> for Hermitian A; the imaginary part must be < 1e-10 and is discarded.
inline double expectation_real(const StateVector& psi, const OperatorMatrix& op) {
    const Complex v = expectation(psi, op);
    if (std::abs(v.imag()) >= 1e-10)
        throw std::runtime_error("expectation_real: imaginary part too large for " +
                                 std::string(op.tag()));
    return v.real();
}

/// The six QFIM generators in index order 1..6 <-> (Jx,Jy,Jz,Kx,Ky,Kz).
inline std::array<OperatorMatrix, 6> six_generators(const FockBasis& b) {
    return {collective_operator(b, Gen::Jx), collective_operator(b, Gen::Jy),
            collective_operator(b, Gen::Jz), collective_operator(b, Gen::Kx),
            collective_operator(b, Gen::Ky), collective_operator(b, Gen::Kz)};
}

struct QfimResult {
    int n_atoms = 0;
    double chi_t = 0.0;
    Eigen::Matrix<double, 6, 6> matrix;
};

/// Pure-state QFIM: F_ij = 4( <{Gi,Gj}>/2 - <Gi><Gj> ).
inline QfimResult qfim(const StateVector& psi, const std::array<OperatorMatrix, 6>& gens,
                       double chi_t = 0.0) {
    if (std::abs(psi.norm() - 1.0) > kTolNorm)
        throw std::invalid_argument("qfim: state not normalized");
    std::array<Vec, 6> gv;
    std::array<double, 6> mean;
    for (int i = 0; i < 6; ++i) {
        gv[i] = gens[i].mat * psi.amplitudes;
        mean[i] = psi.amplitudes.dot(gv[i]).real();
    }
    QfimResult r;
    r.n_atoms = psi.basis_n;
    r.chi_t = chi_t;
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) {
            // <{Gi,Gj}>/2 = Re <Gi psi|Gj psi> for Hermitian generators
            const double v = 4.0 * (gv[i].dot(gv[j]).real() - mean[i] * mean[j]);
            r.matrix(i, j) = r.matrix(j, i) = v;
        }
    return r;
}

struct WitnessReport {
    int n_atoms = 0;
    double tol_witness = 0.0;
    std::array<bool, 6> diagonal{};            // F_ii/N^2 > 1/N per generator
    std::array<std::array<bool, 3>, 3> cross{};  // |F_{i,j+3}| > tol per (J_i, K_j)
    bool any_cross = false;
};

inline WitnessReport entanglement_witness(const QfimResult& q) {
    WitnessReport w;
    w.n_atoms = q.n_atoms;
    const double n2 = double(q.n_atoms) * q.n_atoms;
    w.tol_witness = 1e-6 * n2;
    for (int i = 0; i < 6; ++i) w.diagonal[i] = q.matrix(i, i) / n2 > 1.0 / q.n_atoms;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            w.cross[i][j] = std::abs(q.matrix(i, 3 + j)) > w.tol_witness;
            w.any_cross = w.any_cross || w.cross[i][j];
        }
    return w;
}

// ---------------------------------------------------------------------------
// Joint collective measurements.  J and K observables always commute, so a
// simultaneous eigenbasis exists; the state is rotated so both become
// diagonal in the Fock basis and |amplitude|^2 is binned by (m_J, m_K).
// ---------------------------------------------------------------------------

/// Measured J observable: Jz, or Jx cos(theta) + Jy sin(theta).
struct JaxisSpec {
    bool use_jz = false;
    double theta = 0.0;

    static JaxisSpec jz() { return {true, 0.0}; }
    static JaxisSpec jx() { return {false, 0.0}; }
    static JaxisSpec in_plane(double theta) { return {false, theta}; }

    std::string label() const {
        if (use_jz) return "Jz";
        if (theta == 0.0) return "Jx";
        char buf[64];
        std::snprintf(buf, sizeof buf, "Jx cos(%g)+Jy sin(%g)", theta, theta);
        return buf;
    }
};

/// Measured K observable: Ky, or Kz cos(theta) + Kx sin(theta).
struct KaxisSpec {
    bool use_ky = false;
    double theta = 0.0;

    static KaxisSpec kz() { return {false, 0.0}; }
    static KaxisSpec kx() { return {false, 1.5707963267948966}; }
    static KaxisSpec ky() { return {true, 0.0}; }
    static KaxisSpec in_zx_plane(double theta) { return {false, theta}; }

    std::string label() const {
        if (use_ky) return "Ky";
        if (theta == 0.0) return "Kz";
        if (theta == 1.5707963267948966) return "Kx";
        char buf[64];
        std::snprintf(buf, sizeof buf, "Kz cos(%g)+Kx sin(%g)", theta, theta);
        return buf;
    }
};

/// Rotate |psi> so the measured J observable becomes diag(m_J).
/// Conventions verified in tests: e^{+i(pi/2) Jy} Jx e^{-i(pi/2) Jy} = diag(m_J),
/// and Jx cos(t)+Jy sin(t) = e^{-i t Jz} Jx e^{+i t Jz}.
inline StateVector to_j_eigenframe(const FockBasis& b, const StateVector& psi,
                                   const JaxisSpec& spec) {
    if (spec.use_jz) return psi;
    StateVector s = psi;
    if (spec.theta != 0.0)
        s = PropagatorCache::generator(b, Gen::Jz)->apply(s, -spec.theta);  // e^{+i theta Jz}
    return PropagatorCache::generator(b, Gen::Jy)->apply(s, -M_PI / 2);     // e^{+i(pi/2) Jy}
}

/// Rotate |psi> so the measured K observable becomes diag(m_K).
/// e^{-i(pi/2) Kx} Ky e^{+i(pi/2) Kx} = diag(m_K);
/// Kz cos(t)+Kx sin(t) = e^{-i t Ky} Kz e^{+i t Ky}.
inline StateVector to_k_eigenframe(const FockBasis& b, const StateVector& psi,
                                   const KaxisSpec& spec) {
    if (spec.use_ky) return PropagatorCache::generator(b, Gen::Kx)->apply(psi, M_PI / 2);
    if (spec.theta == 0.0) return psi;
    return PropagatorCache::generator(b, Gen::Ky)->apply(psi, -spec.theta);  // e^{+i theta Ky}
}

struct OutcomeDistribution {
    int n_atoms = 0;
    std::string label_j, label_k;
    Eigen::ArrayXd probs;  // (N+1)^2 entries, index iJ*(N+1)+iK; m = i - N/2

    int side() const { return n_atoms + 1; }
    double prob(int i_j, int i_k) const { return probs[i_j * side() + i_k]; }
    double eigenvalue(int i) const { return i - 0.5 * n_atoms; }
    double sum() const { return probs.sum(); }

    Eigen::ArrayXd marginal_j() const {
        Eigen::ArrayXd m = Eigen::ArrayXd::Zero(side());
        for (int i = 0; i < side(); ++i)
            for (int k = 0; k < side(); ++k) m[i] += probs[i * side() + k];
        return m;
    }
    Eigen::ArrayXd marginal_k() const {
        Eigen::ArrayXd m = Eigen::ArrayXd::Zero(side());
        for (int i = 0; i < side(); ++i)
            for (int k = 0; k < side(); ++k) m[k] += probs[i * side() + k];
        return m;
    }
};

/// Bin |amplitude|^2 of a state already rotated to the joint eigenframe.
inline OutcomeDistribution bin_joint_outcomes(const FockBasis& b, const StateVector& rotated,
                                              std::string label_j, std::string label_k) {
    OutcomeDistribution d;
    d.n_atoms = b.n_atoms();
    d.label_j = std::move(label_j);
    d.label_k = std::move(label_k);
    const int side = b.n_atoms() + 1;
    d.probs = Eigen::ArrayXd::Zero(side * side);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const FockState& s = b.state(i);
        const int ij = (s.n_excited() + b.n_atoms() - s.n_ground()) / 2;  // m_J + N/2
        const int ik = (s.n_plus() + b.n_atoms() - s.n_minus()) / 2;
        d.probs[ij * side + ik] += std::norm(rotated.amplitudes[static_cast<Eigen::Index>(i)]);
    }
    return d;
}

inline OutcomeDistribution joint_outcome_distribution(const FockBasis& b, const StateVector& psi,
                                                      const JaxisSpec& jspec,
                                                      const KaxisSpec& kspec) {
    StateVector rotated = to_k_eigenframe(b, to_j_eigenframe(b, psi, jspec), kspec);
    return bin_joint_outcomes(b, rotated, jspec.label(), kspec.label());
}

/// Named-pair convenience; rejects pairs that are not one J- and one K-family
/// observable (those would not commute).
inline OutcomeDistribution joint_outcome_distribution(const FockBasis& b, const StateVector& psi,
                                                      Gen first, Gen second) {
    auto jaxis = [](Gen g) -> JaxisSpec {
        switch (g) {
            case Gen::Jx: return JaxisSpec::jx();
            case Gen::Jy: return JaxisSpec::in_plane(M_PI / 2);
            case Gen::Jz: return JaxisSpec::jz();
            default: throw std::invalid_argument("joint_outcome_distribution: non-commuting pair");
        }
    };
    auto kaxis = [](Gen g) -> KaxisSpec {
        switch (g) {
            case Gen::Kx: return KaxisSpec::kx();
            case Gen::Ky: return KaxisSpec::ky();
            case Gen::Kz: return KaxisSpec::kz();
            default: throw std::invalid_argument("joint_outcome_distribution: non-commuting pair");
        }
    };
    return joint_outcome_distribution(b, psi, jaxis(first), kaxis(second));
}

// ---------------------------------------------------------------------------
// Classical Fisher information
// ---------------------------------------------------------------------------

struct CfiResult {
    double value = 0.0;
    double excluded_mass = 0.0;  // probability mass below the CFI floor
    double eval_phi = 0.0;
    double h = kFdStep;
};

/// I = sum_j (d/dphi ln P(e_j|phi))^2 P(e_j|phi), central differences.
/// `model` returns the (already marginalized) outcome distribution at a phase.
inline CfiResult cfi_from_model(const std::function<Eigen::ArrayXd(double)>& model, double phi,
                                double h = kFdStep) {
    const Eigen::ArrayXd p0 = model(phi);
    const Eigen::ArrayXd pp = model(phi + h);
    const Eigen::ArrayXd pm = model(phi - h);
    if ((pp < -1e-12).any() || (pm < -1e-12).any() || (p0 < -1e-12).any())
        throw std::runtime_error("cfi_from_model: finite-difference step produced negative probabilities");
    CfiResult r;
    r.eval_phi = phi;
    r.h = h;
    for (Eigen::Index j = 0; j < p0.size(); ++j) {
        if (p0[j] < kCfiProbFloor) {
            r.excluded_mass += std::max(p0[j], 0.0);
            continue;
        }
        const double d = (pp[j] - pm[j]) / (2 * h);
        r.value += d * d / p0[j];
    }
    return r;
}

/// Marginal CFI of a two-phase joint model.  axis 0: J-measurement marginal as
/// a function of phi3 (phi5 held fixed); axis 1: K-measurement marginal vs phi5.
inline CfiResult cfi_marginal(const std::function<OutcomeDistribution(double, double)>& joint_model,
                              double phi3, double phi5, int axis, double h = kFdStep) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("cfi_marginal: axis must be 0 or 1");
    auto marginal = [&](double x) -> Eigen::ArrayXd {
        OutcomeDistribution d = axis == 0 ? joint_model(x, phi5) : joint_model(phi3, x);
        return axis == 0 ? d.marginal_j() : d.marginal_k();
    };
    return cfi_from_model(marginal, axis == 0 ? phi3 : phi5, h);
}

/// P(Kz = +N/2): total weight on Fock states with beta = gamma = 0.
/// No partial trace involved.
inline double k_top_probability(const FockBasis& b, const StateVector& psi) {
    double p = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const FockState& s = b.state(i);
        if (s.beta() == 0 && s.gamma() == 0)
            p += std::norm(psi.amplitudes[static_cast<Eigen::Index>(i)]);
    }
    return p;
}

struct FidelityBoundResult {
    double value = 0.0;
    double eval_phi = 0.0;  // shifted away from degenerate p in {0,1}
    double p_at_eval = 0.0;
};

/// Binary-partition CFI lower bound from the top-outcome probability curve:
/// I = p (d ln p)^2 + (1-p) (d ln(1-p))^2.  Degenerate p in {0,1} at the
/// requested point is evaluated at a small offset instead.
inline FidelityBoundResult fidelity_bound_cfi(const std::function<double(double)>& p_of_phi,
                                              double phi1, double h = kFdStep,
                                              double degenerate_offset = 0.02) {
    FidelityBoundResult r;
    r.eval_phi = phi1;
    double p = p_of_phi(phi1);
    if (p > 1.0 - 1e-12 || p < 1e-12) {
        r.eval_phi = phi1 + (phi1 >= 0 ? degenerate_offset : -degenerate_offset);
        p = p_of_phi(r.eval_phi);
    }
    r.p_at_eval = p;
    const double d = (p_of_phi(r.eval_phi + h) - p_of_phi(r.eval_phi - h)) / (2 * h);
    if (p > kCfiProbFloor) r.value += d * d / p;
    if (1.0 - p > kCfiProbFloor) r.value += d * d / (1.0 - p);
    return r;
}

}  // namespace smsq
