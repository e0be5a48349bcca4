#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "hardy.hpp"
#include "rng.hpp"

namespace hwm {

struct GrassmannPoint {
    int d = 2;
    int k = 1;
    Mat U;
};

inline std::array<Mat, 3> pauli() {
    Mat s1(2, 2), s2(2, 2), s3(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, -I_unit, I_unit, 0;
    s3 << 1, 0, 0, -1;
    return {s1, s2, s3};
}

inline GrassmannPoint pauli_encode(const Eigen::Vector3d& u, double tol = 1e-12) {
    if (std::abs(u.norm() - 1.0) > tol) throw DomainError("pauli_encode needs a unit vector");
    auto s = pauli();
    return {2, 1, u(0) * s[0] + u(1) * s[1] + u(2) * s[2]};
}

inline Eigen::Vector3d pauli_decode(const GrassmannPoint& P) {
    if (P.d != 2 || P.k != 1) throw DomainError("pauli_decode needs d = 2, k = 1");
    auto s = pauli();
    Eigen::Vector3d u;
    for (int i = 0; i < 3; ++i) u(i) = 0.5 * (P.U * s[i]).trace().real();
    return u;
}

struct PointResidual {
    double hermitian = 0.0;
    double involution = 0.0;
    double trace = 0.0;
};

inline PointResidual point_residual(const Mat& U, int k) {
    const auto d = U.rows();
    return {(U - U.adjoint()).norm(), (U * U - Mat::Identity(d, d)).norm(),
            std::abs(U.trace() - cplx(static_cast<double>(d - 2 * k)))};
}

struct BlaschkeProduct {
    double phase = 0.0;
    std::vector<cplx> zeros;
    int degree() const { return static_cast<int>(zeros.size()); }
    double max_radius() const {
        double r = 0.0;
        for (auto a : zeros) r = std::max(r, std::abs(a));
        return r;
    }
};

inline cplx blaschke_eval(const BlaschkeProduct& B, cplx z) {
    cplx w = std::polar(1.0, B.phase);
    for (auto a : B.zeros) {
        if (std::abs(a) >= 1.0) throw DomainError("Blaschke zero outside the open disk");
        cplx den = 1.0 - std::conj(a) * z;
        if (std::abs(den) < 1e-12) throw DomainError("evaluation at a Blaschke pole");
        w *= (z - a) / den;
    }
    return w;
}

// Taylor coefficients b_0..b_N by sampling on a 4(N+1)-point grid.
inline std::vector<cplx> blaschke_coefficients(const BlaschkeProduct& B, int N, double tail_tol = 1e-12) {
    const double r = B.max_radius();
    if (B.degree() > 0 && r > 0.0 && std::pow(r, N) >= tail_tol)
        throw CutoffTooSmall("Blaschke tail " + std::to_string(std::pow(r, N)) + " at N = " + std::to_string(N));
    const int M = 4 * (N + 1);
    GridSamples g;
    g.d = 1;
    g.values.reserve(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) g.values.push_back(Mat::Constant(1, 1, blaschke_eval(B, std::polar(1.0, 2.0 * pi * j / M))));
    FourierSeries f = fit_series(g, N);
    std::vector<cplx> b(static_cast<std::size_t>(N + 1));
    for (int n = 0; n <= N; ++n) b[n] = f[n](0, 0);
    return b;
}

struct GrassmannLoop {
    int d = 2;
    int k = 1;
    FourierSeries series;
    double grid_check = 0.0;
};

struct LoopResidual {
    double hermitian = 0.0;
    double involution = 0.0;
    double trace = 0.0;
    double coeff_symmetry = 0.0;
    double max() const { return std::max({hermitian, involution, trace, coeff_symmetry}); }
};

inline int validation_grid(int N) { return 4 * N + 1; }

inline LoopResidual loop_residual(const FourierSeries& U, int k, int M = 0) {
    if (M <= 0) M = validation_grid(U.N());
    GridSamples g = evaluate_grid(U, M);
    LoopResidual r;
    for (const auto& A : g.values) {
        auto p = point_residual(A, k);
        r.hermitian = std::max(r.hermitian, p.hermitian);
        r.involution = std::max(r.involution, p.involution);
        r.trace = std::max(r.trace, p.trace);
    }
    r.coeff_symmetry = U.hermitian_defect();
    return r;
}

inline GrassmannLoop make_loop(FourierSeries U, int k) {
    GrassmannLoop L;
    L.d = U.d();
    L.k = k;
    L.grid_check = loop_residual(U, k).max();
    L.series = std::move(U);
    return L;
}

struct ValidationReport {
    LoopResidual residual;
    bool ok = false;
    std::string failed;  // name of the first violated invariant
};

inline ValidationReport validate(const GrassmannLoop& L, double tol_invol = 1e-10, double tol_herm = 1e-12) {
    ValidationReport v;
    v.residual = loop_residual(L.series, L.k);
    if (L.series.d() != L.d) v.failed = "dimension";
    else if (v.residual.coeff_symmetry > tol_herm) v.failed = "coefficient-hermitian-symmetry";
    else if (v.residual.hermitian > tol_herm) v.failed = "pointwise-hermitian";
    else if (v.residual.involution > tol_invol) v.failed = "pointwise-involution";
    else if (v.residual.trace > tol_invol) v.failed = "trace";
    v.ok = v.failed.empty();
    return v;
}

inline Mat unit(int d, int i, int j) {
    Mat E = Mat::Zero(d, d);
    E(i, j) = 1.0;
    return E;
}

// W [[v, s conj(B)], [s B, -v]] W*, s = sqrt(1 - v^2)
inline GrassmannLoop traveling_profile(const BlaschkeProduct& B, double v, const Mat& W, int N) {
    if (std::abs(v) >= 1.0) throw DomainError("traveling profile needs |v| < 1");
    if (W.rows() != 2 || W.cols() != 2 || (W.adjoint() * W - Mat::Identity(2, 2)).norm() > 1e-12)
        throw DomainError("conjugating matrix must be a 2x2 unitary");
    const double s = std::sqrt(1.0 - v * v);
    auto b = blaschke_coefficients(B, N);
    FourierSeries U(2, N);
    const Mat E21 = unit(2, 1, 0);
    const Mat E12 = unit(2, 0, 1);
    Mat s3(2, 2);
    s3 << 1, 0, 0, -1;
    U[0] = v * s3;
    for (int n = 0; n <= N; ++n) {
        U[n] += s * b[n] * E21;
        U[-n] += s * std::conj(b[n]) * E12;
    }
    for (int n = -N; n <= N; ++n) U[n] = (W * U[n] * W.adjoint()).eval();
    return make_loop(std::move(U), 1);
}

inline GrassmannLoop half_harmonic_map(const BlaschkeProduct& B, const Mat& W, int N) {
    return traveling_profile(B, 0.0, W, N);
}

// diag(Q, J), J = diag(1_p, -1_q) with p - q = d - 2k, p + q = d - 2
inline GrassmannLoop embed_block(const GrassmannLoop& Q, int d, int k) {
    if (Q.d != 2 || Q.k != 1) throw DomainError("embed_block takes a Gr_1(C^2) loop");
    const int p = d - 1 - k;
    const int q = k - 1;
    if (d < 2 || p < 0 || q < 0) throw DomainError("no block embedding into Gr_" + std::to_string(k) + "(C^" + std::to_string(d) + ")");
    FourierSeries U(d, Q.series.N());
    for (int n = -U.N(); n <= U.N(); ++n) U[n].topLeftCorner(2, 2) = Q.series[n];
    for (int i = 0; i < p; ++i) U[0](2 + i, 2 + i) = 1.0;
    for (int i = 0; i < q; ++i) U[0](2 + p + i, 2 + p + i) = -1.0;
    return make_loop(std::move(U), k);
}

// Pointwise sign(herm(A) - mu) with exactly k eigenvalues below mu.
inline GrassmannLoop project_to_grassmann(const FourierSeries& A, int d, int k, double gap_tol = 1e-8) {
    if (A.d() != d || k < 0 || k > d) throw DomainError("project_to_grassmann shape");
    const int M = validation_grid(A.N());
    Dft dft(M, A.N());
    GridSamples g = dft.evaluate(A);
    for (auto& X : g.values) {
        Mat H = 0.5 * (X + X.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat> es(H);
        const RVec& lam = es.eigenvalues();
        if (k > 0 && k < d && lam(k) - lam(k - 1) <= gap_tol)
            throw GapCollapse("eigenvalues " + std::to_string(k - 1) + " and " + std::to_string(k) + " coincide");
        RVec sgn = RVec::Ones(d);
        sgn.head(k).setConstant(-1.0);
        X = es.eigenvectors() * sgn.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    }
    FourierSeries U = dft.fit(g);
    // exact coefficient symmetry, removes round-off asymmetry from the fit
    for (int n = 0; n <= U.N(); ++n) {
        Mat sym = 0.5 * (U[n] + U[-n].adjoint());
        U[n] = sym;
        U[-n] = sym.adjoint();
    }
    return make_loop(std::move(U), k);
}

inline Mat random_unitary(CounterRng& rng, int d) {
    Mat Z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Z(i, j) = rng.cnormal();
    Eigen::HouseholderQR<Mat> qr(Z);
    Mat Q = qr.householderQ() * Mat::Identity(d, d);
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        cplx r = R(j, j);
        if (std::abs(r) > 0.0) Q.col(j) *= r / std::abs(r);
    }
    return Q;
}

inline BlaschkeProduct random_blaschke(CounterRng& rng, int m, double radius = 0.5) {
    BlaschkeProduct B;
    B.phase = 2.0 * pi * rng.uniform();
    for (int j = 0; j < m; ++j) B.zeros.push_back(rng.disk(radius));
    return B;
}

// V J V* with V a product of m Blaschke-Potapov factors I - P + b_a(z) P.
inline GrassmannLoop random_rational_loop(CounterRng& rng, int d, int k, int m, int N, double radius = 0.5) {
    if (k < 0 || k > d) throw DomainError("random_rational_loop: bad k");
    std::vector<Mat> P;
    std::vector<cplx> a;
    for (int j = 0; j < m; ++j) {
        Vec p(d);
        for (int i = 0; i < d; ++i) p(i) = rng.cnormal();
        p.normalize();
        P.push_back(p * p.adjoint());
        a.push_back(rng.disk(radius));
    }
    Mat J = Mat::Identity(d, d);
    for (int i = d - k; i < d; ++i) J(i, i) = -1.0;
    Mat W = random_unitary(rng, d);
    J = (W * J * W.adjoint()).eval();

    double rmax = 0.0;
    for (auto x : a) rmax = std::max(rmax, std::abs(x));
    // coefficients decay like n^{m-1} rmax^n
    if (m > 0 && std::pow(rmax, N) * std::pow(N + 1.0, m - 1) >= 1e-12)
        throw CutoffTooSmall("rational loop tail too large for N = " + std::to_string(N));
    const int M = 4 * (2 * N + 1);
    GridSamples g;
    g.d = d;
    for (int j = 0; j < M; ++j) {
        cplx z = std::polar(1.0, 2.0 * pi * j / M);
        Mat V = Mat::Identity(d, d);
        for (int i = 0; i < m; ++i) {
            cplx b = (z - a[i]) / (1.0 - std::conj(a[i]) * z);
            V = (V * (Mat::Identity(d, d) - P[i] + b * P[i])).eval();
        }
        g.values.push_back(V * J * V.adjoint());
    }
    FourierSeries U = fit_series(g, N);
    for (int n = 0; n <= U.N(); ++n) {
        Mat sym = 0.5 * (U[n] + U[-n].adjoint());
        U[n] = sym;
        U[-n] = sym.adjoint();
    }
    return make_loop(std::move(U), k);
}

} // namespace hwm
