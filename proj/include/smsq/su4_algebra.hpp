#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fock_basis.hpp"
#include "linalg.hpp"

namespace smsq {

enum class Gen {
    Jx, Jy, Jz, Jp, Jm,
    Kx, Ky, Kz, Kp, Km,
    Ep, Em, E2,
    Ne, Ng, Np1, Nm1,
    HLab, HInt,
    Custom,
};

inline std::string_view gen_name(Gen g) {
    switch (g) {
        case Gen::Jx: return "Jx"; case Gen::Jy: return "Jy"; case Gen::Jz: return "Jz";
        case Gen::Jp: return "Jp"; case Gen::Jm: return "Jm";
        case Gen::Kx: return "Kx"; case Gen::Ky: return "Ky"; case Gen::Kz: return "Kz";
        case Gen::Kp: return "Kp"; case Gen::Km: return "Km";
        case Gen::Ep: return "Ep"; case Gen::Em: return "Em"; case Gen::E2: return "E2";
        case Gen::Ne: return "Ne"; case Gen::Ng: return "Ng";
        case Gen::Np1: return "Np1"; case Gen::Nm1: return "Nm1";
        case Gen::HLab: return "H_lab"; case Gen::HInt: return "H_int";
        case Gen::Custom: return "custom";
    }
    return "?";
}

/// Sparse operator over a FockBasis, tagged with its generator label.
struct OperatorMatrix {
    int basis_n = 0;
    Gen label = Gen::Custom;
    std::string name;  // set for Custom
    SpMat mat;

    std::string_view tag() const { return label == Gen::Custom ? std::string_view(name) : gen_name(label); }
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect(mat) <= tol; }
};

struct ModelParams {
    double chi = 1.0;
    int n_atoms = 1;

    void validate() const {
        if (!(chi > 0.0)) throw std::invalid_argument("ModelParams: chi must be > 0");
        if (n_atoms < 1) throw std::invalid_argument("ModelParams: n_atoms must be >= 1");
    }
};

enum class Picture { Lab, Interaction };

inline std::string_view picture_name(Picture p) {
    return p == Picture::Lab ? "lab" : "interaction";
}

enum class Mode { A, B, C, D };
enum class LadderKind { Annihilate, Create };

namespace detail {

/// Single-mode ladder operator as a transfer matrix between the N-atom and
/// (N -/+ 1)-atom bases: <s'|op|s> = sqrt(occupation) (annihilate) or
/// sqrt(occupation+1) (create). Never part of the public surface; only
/// number-conserving bilinears are exposed.
inline SpMat mode_transfer(const FockBasis& from, Mode mode, LadderKind kind) {
    const int m = static_cast<int>(mode);
    const int n_to = from.n_atoms() + (kind == LadderKind::Create ? 1 : -1);
    if (n_to < 0) return SpMat(0, static_cast<Eigen::Index>(from.size()));
    const FockBasis to(std::max(n_to, 1));
    SpMat out(n_to == 0 ? 1 : static_cast<Eigen::Index>(to.size()),
              static_cast<Eigen::Index>(from.size()));
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::size_t j = 0; j < from.size(); ++j) {
        FockState s = from.state(j);
        double amp;
        if (kind == LadderKind::Annihilate) {
            if (s.n[m] == 0) continue;  // vacuum annihilation: zero column
            amp = std::sqrt(double(s.n[m]));
            s.n[m] -= 1;
        } else {
            amp = std::sqrt(double(s.n[m] + 1));
            s.n[m] += 1;
        }
        const Eigen::Index i = (n_to == 0) ? 0 : static_cast<Eigen::Index>(to.index_of(s));
        trip.emplace_back(i, static_cast<Eigen::Index>(j), Complex(amp, 0.0));
    }
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

/// Number-conserving single-quantum move dst^dag src (dst == src gives n_src).
inline SpMat move_op(const FockBasis& b, Mode dst_mode, Mode src_mode) {
    const int src = static_cast<int>(src_mode), dst = static_cast<int>(dst_mode);
    SpMat out(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size()));
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::size_t j = 0; j < b.size(); ++j) {
        FockState s = b.state(j);
        if (s.n[src] == 0) continue;
        double amp = std::sqrt(double(s.n[src]));
        s.n[src] -= 1;
        amp *= std::sqrt(double(s.n[dst] + 1));
        s.n[dst] += 1;
        trip.emplace_back(static_cast<Eigen::Index>(b.index_of(s)), static_cast<Eigen::Index>(j),
                          Complex(amp, 0.0));
    }
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

template <typename F>
SpMat diagonal_op(const FockBasis& b, F&& value) {
    SpMat out(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size()));
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i),
                          Complex(value(b.state(i)), 0.0));
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

}  // namespace detail

/// created^dag * annihilated over the fixed-N basis, built directly from the
/// bosonic matrix elements (not from truncated single-mode factors).
inline OperatorMatrix bilinear_operator(const FockBasis& b, Mode created, Mode annihilated) {
    OperatorMatrix op;
    op.basis_n = b.n_atoms();
    op.label = Gen::Custom;
    op.name = std::string(1, "abcd"[static_cast<int>(created)]) + "^dag " +
              std::string(1, "abcd"[static_cast<int>(annihilated)]);
    op.mat = detail::move_op(b, created, annihilated);
    return op;
}

/// Collective generators and number operators of the su(4) model.
/// Conventions (verified in tests against [Jp,Jm]=2Jz etc.):
///   J- = a d^dag + c b^dag,  K- = a c^dag + d b^dag,  E+ = a^dag b + c^dag d,
///   Jx = (Jp+Jm)/2, Jy = i(Jm-Jp)/2, same for K;  E2 = Ep Em + Jz^2 - Jz.
inline OperatorMatrix collective_operator(const FockBasis& b, Gen label) {
    using detail::diagonal_op;
    using detail::move_op;
    const auto mk = [&](SpMat m) {
        OperatorMatrix op;
        op.basis_n = b.n_atoms();
        op.label = label;
        op.mat = std::move(m);
        op.mat.makeCompressed();
        return op;
    };
    switch (label) {
        case Gen::Jz:
            return mk(diagonal_op(b, [](const FockState& s) { return s.m_j(); }));
        case Gen::Kz:
            return mk(diagonal_op(b, [](const FockState& s) { return s.m_k(); }));
        case Gen::Ne:
            return mk(diagonal_op(b, [](const FockState& s) { return double(s.n_excited()); }));
        case Gen::Ng:
            return mk(diagonal_op(b, [](const FockState& s) { return double(s.n_ground()); }));
        case Gen::Np1:
            return mk(diagonal_op(b, [](const FockState& s) { return double(s.n_plus()); }));
        case Gen::Nm1:
            return mk(diagonal_op(b, [](const FockState& s) { return double(s.n_minus()); }));
        case Gen::Jm:
            return mk(move_op(b, Mode::D, Mode::A) + move_op(b, Mode::B, Mode::C));
        case Gen::Jp:
            return mk(move_op(b, Mode::A, Mode::D) + move_op(b, Mode::C, Mode::B));
        case Gen::Km:
            return mk(move_op(b, Mode::C, Mode::A) + move_op(b, Mode::B, Mode::D));
        case Gen::Kp:
            return mk(move_op(b, Mode::A, Mode::C) + move_op(b, Mode::D, Mode::B));
        case Gen::Ep:
            return mk(move_op(b, Mode::A, Mode::B) + move_op(b, Mode::C, Mode::D));
        case Gen::Em:
            return mk(move_op(b, Mode::B, Mode::A) + move_op(b, Mode::D, Mode::C));
        case Gen::Jx: {
            SpMat jm = collective_operator(b, Gen::Jm).mat;
            return mk(SpMat(0.5 * (SpMat(jm.adjoint()) + jm)));
        }
        case Gen::Jy: {
            SpMat jm = collective_operator(b, Gen::Jm).mat;
            return mk(SpMat(Complex(0, 0.5) * (jm - SpMat(jm.adjoint()))));
        }
        case Gen::Kx: {
            SpMat km = collective_operator(b, Gen::Km).mat;
            return mk(SpMat(0.5 * (SpMat(km.adjoint()) + km)));
        }
        case Gen::Ky: {
            SpMat km = collective_operator(b, Gen::Km).mat;
            return mk(SpMat(Complex(0, 0.5) * (km - SpMat(km.adjoint()))));
        }
        case Gen::E2: {
            SpMat ep = collective_operator(b, Gen::Ep).mat;
            SpMat jz = collective_operator(b, Gen::Jz).mat;
            SpMat e2 = SpMat(ep * SpMat(ep.adjoint())) + SpMat(jz * jz) - jz;
            return mk(std::move(e2));
        }
        default:
            throw std::invalid_argument("collective_operator: unknown label " +
                                        std::string(gen_name(label)));
    }
}

/// H_lab = chi Ep Em = chi (E2 - Jz^2 + Jz);  H_int = chi (E2 - Jz^2) = H_lab - chi Jz.
inline OperatorMatrix hamiltonian(const FockBasis& b, const ModelParams& p, Picture picture) {
    p.validate();
    SpMat ep = collective_operator(b, Gen::Ep).mat;
    SpMat h = SpMat(ep * SpMat(ep.adjoint()));
    if (picture == Picture::Interaction) h = SpMat(h - collective_operator(b, Gen::Jz).mat);
    OperatorMatrix op;
    op.basis_n = b.n_atoms();
    op.label = picture == Picture::Lab ? Gen::HLab : Gen::HInt;
    op.mat = SpMat(p.chi * h);
    op.mat.makeCompressed();
    return op;
}

struct AlgebraReport {
    struct Entry {
        std::string identity;
        double residual;
    };
    std::vector<Entry> entries;
    double tol = 1e-12;

    double max_residual() const {
        double m = 0;
        for (const auto& e : entries) m = std::max(m, e.residual);
        return m;
    }
    bool all_within_tol() const { return max_residual() <= tol; }
};

/// Residuals of the su(2) sub-algebra relations, cross-commutators and
/// conservation laws of the model (all should vanish to tol_alg = 1e-12).
inline AlgebraReport verify_algebra(const FockBasis& b) {
    AlgebraReport rep;
    auto O = [&](Gen g) { return collective_operator(b, g).mat; };
    const SpMat jz = O(Gen::Jz), kz = O(Gen::Kz);
    const SpMat jp = O(Gen::Jp), jm = O(Gen::Jm), kp = O(Gen::Kp), km = O(Gen::Km);
    const SpMat ep = O(Gen::Ep), em = O(Gen::Em);
    auto push = [&](std::string name, const SpMat& resid) {
        rep.entries.push_back({std::move(name), max_abs(resid)});
    };
    push("[Jp,Jm]-2Jz", SpMat(commutator(jp, jm) - SpMat(2.0 * jz)));
    push("[Jz,Jp]-Jp", SpMat(commutator(jz, jp) - jp));
    push("[Jz,Jm]+Jm", SpMat(commutator(jz, jm) + jm));
    push("[Kp,Km]-2Kz", SpMat(commutator(kp, km) - SpMat(2.0 * kz)));
    push("[Kz,Kp]-Kp", SpMat(commutator(kz, kp) - kp));
    push("[Kz,Km]+Km", SpMat(commutator(kz, km) + km));
    push("[Ep,Em]-2Jz", SpMat(commutator(ep, em) - SpMat(2.0 * jz)));
    push("[Jz,Ep]-Ep", SpMat(commutator(jz, ep) - ep));
    push("[Jz,Em]+Em", SpMat(commutator(jz, em) + em));
    const Gen js[] = {Gen::Jx, Gen::Jy, Gen::Jz};
    const Gen ks[] = {Gen::Kx, Gen::Ky, Gen::Kz};
    for (Gen gj : js)
        for (Gen gk : ks)
            push("[" + std::string(gen_name(gj)) + "," + std::string(gen_name(gk)) + "]",
                 commutator(O(gj), O(gk)));
    ModelParams params{1.0, b.n_atoms()};
    const SpMat hlab = hamiltonian(b, params, Picture::Lab).mat;
    const SpMat hint = hamiltonian(b, params, Picture::Interaction).mat;
    push("H_lab-(E2-Jz^2+Jz)", SpMat(hlab - SpMat(O(Gen::E2) - SpMat(jz * jz) + jz)));
    push("[H_lab,Jz]", commutator(hlab, jz));
    push("[H_lab,Kx]", commutator(hlab, O(Gen::Kx)));
    push("[H_int,Jz]", commutator(hint, jz));
    push("[H_int,Kx]", commutator(hint, O(Gen::Kx)));
    SpMat ident(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size()));
    ident.setIdentity();
    const double n = b.n_atoms();
    push("Ne+Ng-N", SpMat(O(Gen::Ne) + O(Gen::Ng) - SpMat(n * ident)));
    push("Np1+Nm1-N", SpMat(O(Gen::Np1) + O(Gen::Nm1) - SpMat(n * ident)));
    return rep;
}

/// Sparse-triplet text export: header lines then "row,col,re,im" per entry.
inline void write_operator_triplets(std::ostream& os, const OperatorMatrix& op) {
    os << "# smsq operator export schema=smsq.operator.v1\n";
    os << "# basis: four-mode Fock states (alpha,beta,gamma,delta), canonical order"
          " lexicographically decreasing in (alpha,beta,gamma)\n";
    os << "# n_atoms=" << op.basis_n << " label=" << op.tag() << "\n";
    os << "row,col,re,im\n";
    char buf[96];
    for (int k = 0; k < op.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.mat, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g,%.17g\n", long(it.row()), long(it.col()),
                          it.value().real(), it.value().imag());
            os << buf;
        }
}

}  // namespace smsq
