#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "metrology.hpp"
#include "rng.hpp"

namespace smsq {

enum class FitModel { Quadratic, PowerLaw, GaussianOffset };

struct FitResult {
    FitModel model = FitModel::Quadratic;
    std::vector<double> coefficients;  // quadratic: a,b,c of aN^2+bN+c
                                       // power law: exponent, log-prefactor
                                       // gaussian: amplitude, sigma, offset, center
    double residual_norm = 0.0;
    std::pair<double, double> domain{0, 0};
    bool converged = true;
    double stderr_exponent = 0.0;  // power law only
    std::string note;
};

/// Least-squares a N^2 + b N + c over points with N >= n_min (the paper's
/// small-N cut).  Orthogonal factorization via Householder QR.
inline FitResult polyfit_quadratic(std::span<const std::pair<double, double>> points,
                                   double n_min = 4.0) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points)
        if (p.first >= n_min) pts.push_back(p);
    if (pts.size() < 4) throw std::invalid_argument("polyfit_quadratic: need >= 4 points with N >= n_min");
    Eigen::MatrixXd A(pts.size(), 3);
    Eigen::VectorXd y(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        A(i, 0) = pts[i].first * pts[i].first;
        A(i, 1) = pts[i].first;
        A(i, 2) = 1.0;
        y(i) = pts[i].second;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 3) throw std::runtime_error("polyfit_quadratic: rank-deficient design matrix");
    Eigen::VectorXd c = qr.solve(y);
    FitResult r;
    r.model = FitModel::Quadratic;
    r.coefficients = {c[0], c[1], c[2]};
    r.residual_norm = (A * c - y).norm();
    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
    r.domain = {lo->first, hi->first};
    return r;
}

/// y = exp(b) * N^nu by linear regression in log-log coordinates.
inline FitResult fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("fit_power_law: need >= 2 points");
    Eigen::MatrixXd A(points.size(), 2);
    Eigen::VectorXd y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].first <= 0 || points[i].second <= 0)
            throw std::invalid_argument("fit_power_law: nonpositive data");
        A(i, 0) = std::log(points[i].first);
        A(i, 1) = 1.0;
        y(i) = std::log(points[i].second);
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
    FitResult r;
    r.model = FitModel::PowerLaw;
    r.coefficients = {c[0], c[1]};
    r.residual_norm = (A * c - y).norm();
    // standard error of the exponent from the regression
    if (points.size() > 2) {
        const double s2 = r.residual_norm * r.residual_norm / double(points.size() - 2);
        const Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
        r.stderr_exponent = std::sqrt(cov(0, 0));
    }
    auto [lo, hi] = std::minmax_element(points.begin(), points.end());
    r.domain = {lo->first, hi->first};
    return r;
}

/// Nonlinear least squares for A exp(-(x-c)^2/(2 s^2)) + B on the central
/// peak (points above offset + 10% of peak height).  Levenberg-Marquardt with
/// moment-based initialization; offset clamped to >= 0.
inline FitResult fit_gaussian_offset(std::span<const std::pair<double, double>> curve,
                                     int max_iter = 200) {
    if (curve.size() < 5) throw std::invalid_argument("fit_gaussian_offset: need >= 5 points");
    double pmin = curve[0].second, pmax = curve[0].second;
    for (const auto& q : curve) {
        pmin = std::min(pmin, q.second);
        pmax = std::max(pmax, q.second);
    }
    const double cut = pmin + 0.1 * (pmax - pmin);
    std::vector<std::pair<double, double>> peak;
    for (const auto& q : curve)
        if (q.second > cut) peak.push_back(q);
    if (peak.size() < 5) peak.assign(curve.begin(), curve.end());

    // moments of the peak region above the floor
    double w = 0, m1 = 0;
    for (const auto& q : peak) {
        w += q.second - pmin;
        m1 += q.first * (q.second - pmin);
    }
    const double c0 = w > 0 ? m1 / w : 0.0;
    double m2 = 0;
    for (const auto& q : peak) m2 += (q.first - c0) * (q.first - c0) * (q.second - pmin);
    double sigma = w > 0 ? std::sqrt(std::max(m2 / w, 1e-12)) : 0.1;
    double amp = pmax - pmin, off = pmin, center = c0;

    const auto n = static_cast<Eigen::Index>(peak.size());
    Eigen::VectorXd resid(n);
    Eigen::MatrixXd Jac(n, 4);
    double lambda = 1e-3;
    auto evaluate = [&](double A_, double s_, double B_, double c_, Eigen::VectorXd& r_) {
        double ss = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dx = peak[static_cast<std::size_t>(i)].first - c_;
            const double g = std::exp(-dx * dx / (2 * s_ * s_));
            r_[i] = A_ * g + B_ - peak[static_cast<std::size_t>(i)].second;
            ss += r_[i] * r_[i];
        }
        return ss;
    };
    double ss = evaluate(amp, sigma, off, center, resid);
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dx = peak[static_cast<std::size_t>(i)].first - center;
            const double g = std::exp(-dx * dx / (2 * sigma * sigma));
            Jac(i, 0) = g;
            Jac(i, 1) = amp * g * dx * dx / (sigma * sigma * sigma);
            Jac(i, 2) = 1.0;
            Jac(i, 3) = amp * g * dx / (sigma * sigma);
        }
        Eigen::Matrix4d H = Jac.transpose() * Jac;
        H.diagonal() *= (1.0 + lambda);
        Eigen::Vector4d step = H.ldlt().solve(-Jac.transpose() * resid);
        double A1 = amp + step[0], s1 = sigma + step[1], B1 = std::max(0.0, off + step[2]),
               c1 = center + step[3];
        if (s1 <= 0) s1 = sigma / 2;
        Eigen::VectorXd r1(n);
        const double ss1 = evaluate(A1, s1, B1, c1, r1);
        if (ss1 < ss) {
            const double rel = std::abs(ss - ss1) / std::max(ss, 1e-300);
            amp = A1; sigma = s1; off = B1; center = c1; resid = r1; ss = ss1;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-12 || ss < 1e-22 || step.norm() < 1e-13) { converged = true; break; }
        } else {
            if (step.norm() < 1e-13) { converged = true; break; }
            lambda *= 10;
            if (lambda > 1e12) break;
        }
    }
    FitResult r;
    r.model = FitModel::GaussianOffset;
    r.coefficients = {amp, std::abs(sigma), off, center};
    r.residual_norm = std::sqrt(ss);
    r.domain = {peak.front().first, peak.back().first};
    r.converged = converged;
    if (!converged) r.note = "LM not converged; moment-based parameters returned";
    return r;
}

struct ThetaOptResult {
    double theta = 0.0;
    double variance = 0.0;
    bool flat = false;  // objective varied < 1e-10 across the coarse scan
};

/// Angle in [0, pi) maximizing Var(Jz) of exp(-i theta Jx)|probe>.
/// 64-point coarse scan, then golden-section refinement.
inline ThetaOptResult find_theta_opt(const FockBasis& b, const StateVector& probe) {
    auto jx = PropagatorCache::generator(b, Gen::Jx);
    const OperatorMatrix jz = collective_operator(b, Gen::Jz);
    auto var_jz = [&](double theta) {
        StateVector s = jx->apply(probe, theta);
        const Vec v = jz.mat * s.amplitudes;
        const double m = s.amplitudes.dot(v).real();
        return v.squaredNorm() - m * m;
    };
    constexpr int kCoarse = 64;
    double best = -1, best_theta = 0, lo_val = 1e300, hi_val = -1e300;
    for (int i = 0; i < kCoarse; ++i) {
        const double th = M_PI * i / kCoarse;
        const double v = var_jz(th);
        lo_val = std::min(lo_val, v);
        hi_val = std::max(hi_val, v);
        if (v > best) { best = v; best_theta = th; }
    }
    ThetaOptResult r;
    if (hi_val - lo_val < 1e-10) {
        r.flat = true;
        r.variance = var_jz(0.0);
        return r;
    }
    double a = best_theta - M_PI / kCoarse, c = best_theta + M_PI / kCoarse;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = var_jz(x1), f2 = var_jz(x2);
    for (int it = 0; it < 80 && c - a > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (c - a); f2 = var_jz(x2);
        } else {
            c = x2; x2 = x1; f2 = f1;
            x1 = c - gr * (c - a); f1 = var_jz(x1);
        }
    }
    r.theta = (a + c) / 2;
    if (r.theta < 0) r.theta += M_PI;
    r.variance = var_jz(r.theta);
    return r;
}

struct TMaxResult {
    double t_max = 0.0;
    double cov_max = 0.0;  // value of F16 = 4 cov(Jx, Kz) at t_max
    bool on_boundary = false;
};

/// argmax over the time grid of F16(t) = 4 cov(Jx,Kz), refined by quadratic
/// interpolation of the three bracketing points.  Mirror ties (even N gives a
/// curve exactly symmetric about pi/2) break to the earliest grid time; a
/// maximum on the grid boundary is flagged and not refined.
inline TMaxResult find_t_max(const FockBasis& b, std::span<const double> grid,
                             Picture picture = Picture::Lab, double chi = 1.0) {
    if (grid.size() < 3) throw std::invalid_argument("find_t_max: grid too small");
    auto prop = PropagatorCache::hamiltonian(b, ModelParams{chi, b.n_atoms()}, picture);
    const OperatorMatrix jx = collective_operator(b, Gen::Jx);
    const OperatorMatrix kz = collective_operator(b, Gen::Kz);
    const StateVector psi0 = initial_state(b);
    std::vector<double> times(grid.begin(), grid.end());
    auto states = prop->apply_path(psi0, times);
    std::vector<double> f16(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Vec vj = jx.mat * states[i].amplitudes;
        const Vec vk = kz.mat * states[i].amplitudes;
        const double mj = states[i].amplitudes.dot(vj).real();
        const double mk = states[i].amplitudes.dot(vk).real();
        f16[i] = 4.0 * (vj.dot(vk).real() - mj * mk);
    }
    std::size_t k = 0;
    for (std::size_t i = 1; i < f16.size(); ++i)
        if (f16[i] > f16[k] * (1.0 + 1e-6) + 1e-12) k = i;  // earliest among near-ties
    TMaxResult r;
    r.t_max = times[k];
    r.cov_max = f16[k];
    if (k == 0 || k + 1 == f16.size()) {
        r.on_boundary = true;
        return r;
    }
    const double y0 = f16[k - 1], y1 = f16[k], y2 = f16[k + 1];
    const double denom = y0 - 2 * y1 + y2;
    if (denom < 0) {
        const double dt = (times[k + 1] - times[k - 1]) / 2;
        const double shift = 0.5 * dt * (y0 - y2) / denom;
        r.t_max = times[k] + shift;
        r.cov_max = y1 - 0.25 * (y0 - y2) * shift / dt;
    }
    return r;
}

}  // namespace smsq
