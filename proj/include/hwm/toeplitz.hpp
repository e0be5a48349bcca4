#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "grassmann.hpp"
#include "hardy.hpp"

namespace hwm {

// Acts on stacked Hardy coordinates, modes 0..N, block size d^2.
struct BlockToeplitz {
    int d = 1;
    int N = 0;
    Mat M;
};

// Hardy modes 0..N to negative modes -1..-N (row block m is mode -m-1).
struct BlockHankel {
    int d = 1;
    int N = 0;
    Mat M;
};

inline BlockToeplitz build_toeplitz(const FourierSeries& U, int N) {
    const int b = U.d() * U.d();
    BlockToeplitz T{U.d(), N, Mat::Zero(static_cast<Eigen::Index>(b) * (N + 1), static_cast<Eigen::Index>(b) * (N + 1))};
    std::vector<Mat> L;
    for (int j = -N; j <= N; ++j) L.push_back(left_mult(U.at(j)));
    for (int m = 0; m <= N; ++m)
        for (int n = 0; n <= N; ++n) T.M.block(m * b, n * b, b, b) = L[static_cast<std::size_t>(m - n + N)];
    return T;
}

inline BlockHankel build_hankel(const FourierSeries& U, int N) {
    const int b = U.d() * U.d();
    BlockHankel H{U.d(), N, Mat::Zero(static_cast<Eigen::Index>(b) * N, static_cast<Eigen::Index>(b) * (N + 1))};
    for (int m = 0; m < N; ++m)
        for (int n = 0; n <= N; ++n) {
            Mat A = U.at(-m - n - 1);
            if (A.squaredNorm() > 0.0) H.M.block(m * b, n * b, b, b) = left_mult(A);
        }
    return H;
}

inline Mat backward_shift_matrix(int d, int N) {
    const int b = d * d;
    Mat S = Mat::Zero(static_cast<Eigen::Index>(b) * (N + 1), static_cast<Eigen::Index>(b) * (N + 1));
    for (int i = 0; i < b * N; ++i) S(i, i + b) = 1.0;
    return S;
}

inline Mat forward_shift_matrix(int d, int N) { return backward_shift_matrix(d, N).adjoint(); }

// D = diag(n) on Hardy coordinates
inline Mat d_matrix(int d, int N) {
    const int b = d * d;
    Mat D = Mat::Zero(static_cast<Eigen::Index>(b) * (N + 1), static_cast<Eigen::Index>(b) * (N + 1));
    for (int n = 0; n <= N; ++n)
        for (int l = 0; l < b; ++l) D(n * b + l, n * b + l) = static_cast<double>(n);
    return D;
}

// Top-left block covering modes 0..n_int.
inline double interior_norm(const Mat& A, int d, int n_int) {
    if (n_int < 0) return 0.0;
    const Eigen::Index s = static_cast<Eigen::Index>(d) * d * (n_int + 1);
    return A.topLeftCorner(s, s).norm();
}

inline int effective_bandwidth(const FourierSeries& U, double rel_tol = 1e-15) {
    double scale = 0.0;
    for (const auto& A : U.coeffs()) scale = std::max(scale, A.norm());
    return U.bandwidth(rel_tol * std::max(scale, 1.0));
}

struct KeyIdentityReport {
    int interior_modes = 0;         // identity checked on modes 0..interior_modes
    double interior_residual = 0.0; // |T^2 + H*H - I| there
    double trace_full = 0.0;        // Tr(H*H) over C^{dxd}-valued coordinates
    double trace_K = 0.0;           // normalized trace Tr/d (one column block)
    double energy = 0.0;
    double trace_residual = 0.0;    // |trace_K - energy|
};

inline KeyIdentityReport key_identity_check(const FourierSeries& U, int N) {
    KeyIdentityReport r;
    const int d = U.d();
    auto T = build_toeplitz(U, N);
    auto H = build_hankel(U, N);
    Mat R = T.M * T.M + H.M.adjoint() * H.M - Mat::Identity(T.M.rows(), T.M.cols());
    r.interior_modes = N - effective_bandwidth(U);
    r.interior_residual = interior_norm(R, d, r.interior_modes);
    r.trace_full = H.M.squaredNorm();
    r.trace_K = r.trace_full / d;
    r.energy = sobolev_energy(U);
    r.trace_residual = std::abs(r.trace_K - r.energy);
    return r;
}

struct SpectralData {
    RVec eigenvalues;  // ascending
    Mat eigenvectors;
    int near_edge_count = 0;
    double max_residual = 0.0;
    double orthonormality = 0.0;
};

inline SpectralData eig_hermitian(const Mat& T, double delta_edge = 1e-3) {
    Mat H = 0.5 * (T + T.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    SpectralData s;
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();
    for (Eigen::Index j = 0; j < s.eigenvalues.size(); ++j) {
        if (std::abs(s.eigenvalues(j)) > 1.0 - delta_edge) ++s.near_edge_count;
        s.max_residual = std::max(s.max_residual, (T * s.eigenvectors.col(j) - s.eigenvalues(j) * s.eigenvectors.col(j)).norm());
    }
    s.orthonormality = (s.eigenvectors.adjoint() * s.eigenvectors - Mat::Identity(H.rows(), H.cols())).norm();
    return s;
}

inline SpectralData eig_hermitian(const BlockToeplitz& T, double delta_edge = 1e-3) { return eig_hermitian(T.M, delta_edge); }

// max over F of |[S*, T_U]F - (S* Pi U) F_0| on modes 0..N-1
inline double commutator_rank_one_check(const FourierSeries& U, int N, const std::vector<HardyElement>& Fs) {
    const int d = U.d();
    auto T = build_toeplitz(U, N);
    Mat Sb = backward_shift_matrix(d, N);
    Mat C = Sb * T.M - T.M * Sb;
    const Eigen::Index keep = static_cast<Eigen::Index>(d) * d * N;
    double worst = 0.0;
    for (const auto& F : Fs) {
        Vec lhs = C * F.to_vec();
        HardyElement rhs(d, N);
        for (int n = 0; n < N; ++n) rhs[n] = U.at(n + 1) * F[0];
        worst = std::max(worst, (lhs - rhs.to_vec()).head(keep).norm());
    }
    return worst;
}

// exact product of two truncated series
inline FourierSeries multiply(const FourierSeries& F, const FourierSeries& G) {
    FourierSeries P(F.d(), F.N() + G.N());
    for (int m = -F.N(); m <= F.N(); ++m)
        for (int n = -G.N(); n <= G.N(); ++n) P[m + n] += F[m] * G[n];
    return P;
}

inline FourierSeries adjoint_series(const FourierSeries& F) {
    FourierSeries G(F.d(), F.N());
    for (int n = -F.N(); n <= F.N(); ++n) G[n] = F[-n].adjoint();
    return G;
}

// |T_{FG} - T_F T_G - H*_{F*} H_G| on the interior block
inline double toeplitz_product_identity(const FourierSeries& F, const FourierSeries& G, int N) {
    auto TFG = build_toeplitz(multiply(F, G), N);
    auto TF = build_toeplitz(F, N);
    auto TG = build_toeplitz(G, N);
    auto HFs = build_hankel(adjoint_series(F), N);
    auto HG = build_hankel(G, N);
    Mat R = TFG.M - TF.M * TG.M - HFs.M.adjoint() * HG.M;
    return interior_norm(R, F.d(), N - std::max(effective_bandwidth(F), 1));
}

struct KroneckerRank {
    int rank = 0;
    RVec singular_values;
    double gap_ratio = 0.0;  // sigma_r / sigma_{r+1}; infinite when nothing follows
    bool rational = true;
};

inline KroneckerRank kronecker_rank(const FourierSeries& U, int N, double rank_tol = 1e-8, double gap_required = 1e3) {
    auto H = build_hankel(U, N);
    Eigen::BDCSVD<Mat> svd(H.M);
    KroneckerRank k;
    k.singular_values = svd.singularValues();
    const auto& s = k.singular_values;
    if (s.size() == 0 || s(0) == 0.0) {
        k.gap_ratio = INFINITY;
        return k;
    }
    while (k.rank < s.size() && s(k.rank) > rank_tol * s(0)) ++k.rank;
    if (k.rank < s.size())
        k.gap_ratio = s(k.rank) > 0.0 ? s(k.rank - 1) / s(k.rank) : INFINITY;
    else
        k.gap_ratio = INFINITY;
    k.rational = k.gap_ratio > gap_required && k.rank < s.size();
    return k;
}

// I_p = Tr |K|^{p/2}, normalized trace (one column block of C^{dxd})
inline double schatten_from_singular_values(const RVec& sv, int d, double p) {
    if (p < 1.0) throw DomainError("Schatten exponent must be >= 1");
    double s = 0.0;
    for (Eigen::Index j = 0; j < sv.size(); ++j) s += std::pow(sv(j), p);
    return s / d;
}

inline double schatten_norm(const FourierSeries& U, int N, double p) {
    if (p < 1.0) throw DomainError("Schatten exponent must be >= 1");
    auto H = build_hankel(U, N);
    Eigen::BDCSVD<Mat> svd(H.M);
    return schatten_from_singular_values(svd.singularValues(), U.d(), p);
}

struct SubspaceFrame {
    int d = 1;
    int N = 0;
    Mat V;        // orthonormal columns spanning K inside the truncated Hardy space
    Mat TK;       // V* T V
    Mat SK;       // V* S* V
    Mat mean_map; // d^2 x dim, coordinates -> vec(F_0)
    Vec c0;       // coordinates of Pi U0
    int dim_H = 0;
    RVec hankel_singular_values;
    double invariance_T = 0.0;  // |(I - P) T P|
    double invariance_S = 0.0;  // |(I - P) S* P|
    int dim() const { return static_cast<int>(V.cols()); }
};

namespace detail {
// Gram-Schmidt with one reorthogonalization pass; returns false if x is dependent
inline bool append_orthonormal(Mat& V, Vec x, double tol = 1e-10) {
    const double n0 = x.norm();
    if (n0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
        if (V.cols() > 0) x -= V * (V.adjoint() * x);
    if (x.norm() <= tol * n0) return false;
    V.conservativeResize(x.size(), V.cols() + 1);
    V.col(V.cols() - 1) = x / x.norm();
    return true;
}
} // namespace detail

// K = range(H*) + C Pi U0 + C 1
inline SubspaceFrame invariant_subspace(const FourierSeries& U0, int N, double rank_tol = 1e-8, double gap_required = 1e3) {
    const int d = U0.d();
    const int b = d * d;
    SubspaceFrame f;
    f.d = d;
    f.N = N;
    auto H = build_hankel(U0, N);
    Eigen::BDCSVD<Mat> svd(H.M, Eigen::ComputeThinV);
    f.hankel_singular_values = svd.singularValues();
    const auto& s = f.hankel_singular_values;
    int r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        while (r < s.size() && s(r) > rank_tol * s(0)) ++r;
    if (r > 0 && r < s.size() && s(r) > 0.0 && s(r - 1) / s(r) <= gap_required)
        throw NotRational("no Hankel spectral gap at rank " + std::to_string(r));
    if (r > 0 && r == s.size()) throw NotRational("Hankel rank saturates the truncation N = " + std::to_string(N));
    f.dim_H = r;
    const Eigen::Index n = static_cast<Eigen::Index>(b) * (N + 1);
    f.V = Mat(n, 0);
    for (int j = 0; j < r; ++j) detail::append_orthonormal(f.V, svd.matrixV().col(j));
    Vec piU = project_plus(U0.resized(std::min(U0.N(), N)).resized(N)).to_vec();
    detail::append_orthonormal(f.V, piU);
    Vec one = Vec::Zero(n);
    one.head(b) = vec_rowmajor(Mat::Identity(d, d));
    detail::append_orthonormal(f.V, one);

    auto T = build_toeplitz(U0, N);
    Mat Sb = backward_shift_matrix(d, N);
    Mat TV = T.M * f.V;
    Mat SV = Sb * f.V;
    f.TK = f.V.adjoint() * TV;
    f.SK = f.V.adjoint() * SV;
    f.invariance_T = (TV - f.V * f.TK).norm();
    f.invariance_S = (SV - f.V * f.SK).norm();
    f.mean_map = f.V.topRows(b);
    f.c0 = f.V.adjoint() * piU;
    return f;
}

// Full truncated space as the frame (non-rational data).
inline SubspaceFrame full_frame(const FourierSeries& U0, int N) {
    const int d = U0.d();
    const int b = d * d;
    SubspaceFrame f;
    f.d = d;
    f.N = N;
    const Eigen::Index n = static_cast<Eigen::Index>(b) * (N + 1);
    f.V = Mat::Identity(n, n);
    f.TK = build_toeplitz(U0, N).M;
    f.SK = backward_shift_matrix(d, N);
    f.mean_map = f.V.topRows(b);
    f.c0 = project_plus(U0.resized(std::min(U0.N(), N)).resized(N)).to_vec();
    f.dim_H = kronecker_rank(U0, N).rank;
    return f;
}

// sign = +1: -(i/2)(T D + D T) + (i/2) T_{|D|U}; sign = -1 flips the whole operator
inline Mat build_b_operator(const FourierSeries& U, int N, int sign = +1) {
    const int d = U.d();
    Mat T = build_toeplitz(U, N).M;
    Mat D = d_matrix(d, N);
    Mat TabsD = build_toeplitz(fractional_derivative(U, DerivKind::abs), N).M;
    Mat B = -0.5 * I_unit * (T * D + D * T) + 0.5 * I_unit * TabsD;
    return static_cast<double>(sign) * B;
}

// Eigenvalues of T_U compressed to H(U) = range(H*_U); this is where the
// discrete spectrum in (-1, 1) lives, free of finite-section edge effects.
inline RVec hankel_range_spectrum(const FourierSeries& U, int N, double rank_tol = 1e-8) {
    auto H = build_hankel(U, N);
    Eigen::BDCSVD<Mat> svd(H.M, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    int r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        while (r < s.size() && s(r) > rank_tol * s(0)) ++r;
    if (r == 0) return RVec(0);
    Mat W = svd.matrixV().leftCols(r);
    Mat C = W.adjoint() * build_toeplitz(U, N).M * W;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline std::vector<double> interior_eigenvalues(const RVec& ev, double delta) {
    std::vector<double> out;
    for (Eigen::Index j = 0; j < ev.size(); ++j)
        if (std::abs(ev(j)) < 1.0 - delta) out.push_back(ev(j));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace hwm
