#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "evolution.hpp"
#include "hardy.hpp"
#include "toeplitz.hpp"

namespace hwm {

// Sigma* = e^{-itL} S* on some coordinate space, with P_Sigma given by mean_map.
struct IsometryModel {
    int e_dim = 1;    // dimension of the coefficient space E
    double t = 0.0;   // parameter in e^{-itL}
    Mat L;
    Mat S_star;
    Mat mean_map;     // e_dim x n
    Mat sigma_star;

    Eigen::Index n() const { return L.rows(); }

    // |Sigma* Sigma - I| on columns away from the truncation edge
    double isometry_defect(int edge_blocks = 1) const {
        Mat Sg = sigma_star.adjoint();
        Mat R = sigma_star * Sg - Mat::Identity(n(), n());
        const Eigen::Index keep = n() - static_cast<Eigen::Index>(edge_blocks) * e_dim * 4;
        return keep > 0 ? R.topLeftCorner(keep, keep).norm() : 0.0;
    }
};

inline Mat hermitian_exp(const Mat& L, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (L + L.adjoint()));
    Vec ph(es.eigenvalues().size());
    for (Eigen::Index j = 0; j < ph.size(); ++j) ph(j) = std::polar(1.0, -t * es.eigenvalues()(j));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline IsometryModel make_model(Mat L, Mat S_star, Mat mean_map, int e_dim, double t) {
    IsometryModel m;
    m.e_dim = e_dim;
    m.t = t;
    m.sigma_star = hermitian_exp(L, t) * S_star;
    m.L = std::move(L);
    m.S_star = std::move(S_star);
    m.mean_map = std::move(mean_map);
    return m;
}

// Truncated Hardy space over E = C^{dxd}, modes 0..N.
inline IsometryModel hardy_model(const Mat& L, int d, int N, double t) {
    const int b = d * d;
    Mat S = backward_shift_matrix(d, N);
    if (L.rows() != S.rows()) throw DomainError("generator size does not match the truncated Hardy space");
    Mat P = Mat::Identity(b, S.rows());
    return make_model(L, S, P, b, t);
}

// The HWM model restricted to the invariant subspace of a plan.
inline IsometryModel restricted_model(const EvolutionPlan& p, double t) {
    return make_model(p.frame.TK, p.frame.SK, p.frame.mean_map, p.frame.d * p.frame.d, t);
}

// Coefficients P (Sigma*)^n F, n < n_max, as a Hardy element (E = C^{dxd}, or C when e_dim = 1).
inline HardyElement apply_u_sigma(const IsometryModel& m, const Vec& F, int n_max) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.e_dim))));
    if (d * d != m.e_dim) throw DomainError("coefficient space is not square");
    if (n_max < 1) throw DomainError("n_max must be positive");
    HardyElement out(d, n_max - 1);
    Vec x = F;
    for (int n = 0; n < n_max; ++n) {
        out[n] = unvec_rowmajor(m.mean_map * x, d);
        x = m.sigma_star * x;
    }
    return out;
}

struct StabilityReport {
    std::vector<double> defect;   // |(Sigma*)^n F|, n = 0..n_max
    std::vector<double> partial;  // sum_{j<n} |P (Sigma*)^j F|^2
    double telescoping_residual = 0.0;
    double limit = 0.0;           // defect at n_max
    double octave_slope = 0.0;    // log(defect(n_max) / defect(n_max/2)), natural log per doubling
    bool monotone = true;
};

inline StabilityReport defect_report(std::vector<double> defect, std::vector<double> partial, double F2) {
    StabilityReport r;
    r.defect = std::move(defect);
    r.partial = std::move(partial);
    const std::size_t n_max = r.defect.size() - 1;
    for (std::size_t n = 0; n <= n_max; ++n) {
        r.telescoping_residual = std::max(r.telescoping_residual, std::abs(r.partial[n] - (F2 - r.defect[n] * r.defect[n])));
        if (n > 0 && r.defect[n] > r.defect[n - 1] * (1.0 + 1e-12) + 1e-300) r.monotone = false;
    }
    r.limit = r.defect.back();
    const double a = r.defect[n_max / 2], b = r.defect[n_max];
    r.octave_slope = (a > 0.0 && b > 0.0) ? std::log(b / a) : -INFINITY;
    return r;
}

inline StabilityReport parseval_defect(const IsometryModel& m, const Vec& F, int n_max) {
    std::vector<double> defect, partial;
    Vec x = F;
    double acc = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        defect.push_back(x.norm());
        partial.push_back(acc);
        acc += (m.mean_map * x).squaredNorm();
        x = m.sigma_star * x;
    }
    return defect_report(std::move(defect), std::move(partial), F.squaredNorm());
}

enum class Verdict { stable, unstable, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    default: return "inconclusive";
    }
}

// stable: every defect drops below tol |F|; unstable: some defect stays above
// tol with |log slope| < slope_tol per doubling of n; otherwise inconclusive.
inline Verdict classify(const std::vector<StabilityReport>& reports, const std::vector<double>& norms, double tol,
                        double slope_tol = 1e-3) {
    bool all_small = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (r.limit > tol * norms[i]) {
            all_small = false;
            if (std::abs(r.octave_slope) < slope_tol) return Verdict::unstable;
        }
    }
    return all_small ? Verdict::stable : Verdict::inconclusive;
}

inline Verdict strong_stability_test(const IsometryModel& m, const std::vector<Vec>& samples, int n_max, double tol = 1e-10) {
    std::vector<StabilityReport> reps;
    std::vector<double> norms;
    for (const auto& F : samples) {
        reps.push_back(parseval_defect(m, F, n_max));
        norms.push_back(F.norm());
    }
    return classify(reps, norms, tol);
}

// e^{-i tau T_{u0}} S* on the scalar Hardy space, tau = time_scale * t.
// time_scale = 2 matches u_t + 2 u u_theta = 0, whose breaking time is -1/(2 min u0').
inline IsometryModel zd_bo_model(int N, const FourierSeries& u0, double t, double time_scale = 2.0) {
    if (u0.d() != 1) throw DomainError("zero-dispersion model is scalar");
    if (u0.hermitian_defect() > 1e-14) throw DomainError("u0 must be real-valued");
    Mat L = build_toeplitz(u0, N).M;
    return hardy_model(L, 1, N, time_scale * t);
}

inline FourierSeries minus_cos(int N = 1) {
    FourierSeries u(1, std::max(N, 1));
    u[1](0, 0) = -0.5;
    u[-1](0, 0) = -0.5;
    return u;
}

struct WoldEstimate {
    int dim = 0;
    int dim_unitary = 0;            // #{|mu| > 1 - delta} for eigenvalues of Sigma*
    int dim_defect_preserving = 0;  // #{sigma_j((Sigma*)^budget) > 1 - delta}
    int dim_shift = 0;              // dim - dim_unitary
    double spectral_radius = 0.0;
};

inline WoldEstimate wold_decomposition_estimate(const IsometryModel& m, int budget = 0, double delta = 1e-3) {
    WoldEstimate w;
    w.dim = static_cast<int>(m.n());
    if (budget <= 0) budget = 4 * w.dim;
    Eigen::ComplexEigenSolver<Mat> es(m.sigma_star, false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        double a = std::abs(es.eigenvalues()(j));
        w.spectral_radius = std::max(w.spectral_radius, a);
        if (a > 1.0 - delta) ++w.dim_unitary;
    }
    // repeated squaring up to budget
    Mat P = Mat::Identity(m.n(), m.n());
    Mat B = m.sigma_star;
    for (int e = budget; e > 0; e >>= 1) {
        if (e & 1) P = P * B;
        if (e > 1) B = B * B;
    }
    Eigen::BDCSVD<Mat> svd(P);
    for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()(j) > 1.0 - delta) ++w.dim_defect_preserving;
    w.dim_shift = w.dim - w.dim_unitary;
    return w;
}

// Fast scalar path for real symmetric L: iterate in the eigenbasis of L,
// where Sigma* = W e^{-i tau Lambda} (W^T S* W) W^T.
class RealScalarFlow {
public:
    RealScalarFlow(const RMat& L) {
        Eigen::SelfAdjointEigenSolver<RMat> es(L);
        lam_ = es.eigenvalues();
        W_ = es.eigenvectors();
        const Eigen::Index n = L.rows();
        RMat SW = RMat::Zero(n, n);
        SW.topRows(n - 1) = W_.bottomRows(n - 1);  // S* W
        G_ = W_.transpose() * SW;
        mean_row_ = W_.row(0);
    }

    Eigen::Index n() const { return lam_.size(); }

    struct Run {
        std::vector<double> defect;
        std::vector<double> partial;
        std::vector<cplx> coeffs;
    };

    Run run(const Vec& F, double tau, int n_max) const {
        const Eigen::Index n = lam_.size();
        RMat Y(n, 2);
        Vec y = W_.transpose().cast<cplx>() * F;
        Y.col(0) = y.real();
        Y.col(1) = y.imag();
        RVec c = (-tau * lam_).array().cos();
        RVec s = (-tau * lam_).array().sin();
        Run r;
        double acc = 0.0;
        for (int k = 0; k <= n_max; ++k) {
            const double re = mean_row_.dot(Y.col(0));
            const double im = mean_row_.dot(Y.col(1));
            r.defect.push_back(Y.norm());
            r.partial.push_back(acc);
            r.coeffs.emplace_back(re, im);
            acc += re * re + im * im;
            if (k == n_max) break;
            RMat Z = G_ * Y;
            Y.col(0) = c.cwiseProduct(Z.col(0)) - s.cwiseProduct(Z.col(1));
            Y.col(1) = s.cwiseProduct(Z.col(0)) + c.cwiseProduct(Z.col(1));
        }
        return r;
    }

private:
    RVec lam_;
    RMat W_;
    RMat G_;
    RVec mean_row_;
};

struct NormCurveRow {
    double t = 0.0;
    int N = 0;
    double norm = 0.0;
    double deficit = 0.0;
    Verdict verdict = Verdict::inconclusive;
    double telescoping_residual = 0.0;
};

// t -> |U_L(t) Pi u0| from P (Sigma*)^n Pi u0, n < n_max (default 2N).
inline std::vector<NormCurveRow> zd_bo_norm_curve(int N, const FourierSeries& u0, const std::vector<double>& times,
                                                  int n_max = 0, double time_scale = 2.0, double tol = 1e-10) {
    if (u0.d() != 1) throw DomainError("zero-dispersion model is scalar");
    if (u0.hermitian_defect() > 1e-14) throw DomainError("u0 must be real-valued");
    if (n_max <= 0) n_max = 2 * N;
    Mat Lc = build_toeplitz(u0, N).M;
    if (Lc.imag().norm() > 1e-14)
        throw DomainError("fast path needs a real symmetric generator (even symbol)");
    RealScalarFlow flow(Lc.real());
    Vec F = project_plus(u0.resized(std::min(u0.N(), N)).resized(N)).to_vec();
    const double F2 = F.squaredNorm();
    std::vector<NormCurveRow> rows;
    for (double t : times) {
        auto run = flow.run(F, time_scale * t, n_max);
        auto rep = defect_report(run.defect, run.partial, F2);
        NormCurveRow row;
        row.t = t;
        row.N = N;
        row.norm = std::sqrt(run.partial.back());
        row.deficit = std::sqrt(F2) - row.norm;
        row.verdict = classify({rep}, {std::sqrt(F2)}, tol);
        row.telescoping_residual = rep.telescoping_residual;
        rows.push_back(row);
    }
    return rows;
}

// Smallest t in [lo, hi] with deficit > threshold, by bisection (deficit is
// assumed monotone across the onset).
inline double zd_bo_onset(int N, const FourierSeries& u0, double lo, double hi, double threshold = 1e-5,
                          int iters = 30, double time_scale = 2.0) {
    auto deficit = [&](double t) { return zd_bo_norm_curve(N, u0, {t}, 0, time_scale).front().deficit; };
    if (deficit(hi) <= threshold) return INFINITY;
    if (deficit(lo) > threshold) return lo;
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        (deficit(mid) > threshold ? hi : lo) = mid;
    }
    return hi;
}

} // namespace hwm
