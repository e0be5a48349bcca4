#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "core.hpp"

namespace hwm {

enum SeriesFlag : unsigned { flag_none = 0, flag_truncated = 1u, flag_aliased = 2u };

// Two-sided truncated block Fourier series, modes -N..N.
class FourierSeries {
public:
    FourierSeries() = default;
    FourierSeries(int d, int N) : d_(d), N_(N), c_(static_cast<std::size_t>(2 * N + 1), Mat::Zero(d, d)) {
        if (d < 1 || N < 0) throw DomainError("FourierSeries needs d >= 1 and N >= 0");
    }

    static FourierSeries constant(const Mat& A, int N) {
        FourierSeries F(static_cast<int>(A.rows()), N);
        F[0] = A;
        return F;
    }

    int d() const { return d_; }
    int N() const { return N_; }
    std::size_t size() const { return c_.size(); }

    Mat& operator[](int n) { return c_[index(n)]; }
    const Mat& operator[](int n) const { return c_[index(n)]; }

    // zero outside the stored range
    Mat at(int n) const { return std::abs(n) <= N_ ? c_[static_cast<std::size_t>(n + N_)] : Mat::Zero(d_, d_); }

    const std::vector<Mat>& coeffs() const { return c_; }

    FourierSeries resized(int N) const {
        FourierSeries G(d_, N);
        for (int n = -std::min(N, N_); n <= std::min(N, N_); ++n) G[n] = (*this)[n];
        G.flags = flags;
        if (N < N_)
            for (int n = N + 1; n <= N_; ++n)
                if (fro2((*this)[n]) + fro2((*this)[-n]) > 0.0) G.flags |= flag_truncated;
        return G;
    }

    // largest |n| whose coefficient exceeds tol in Frobenius norm
    int bandwidth(double tol = 0.0) const {
        for (int n = N_; n > 0; --n)
            if ((*this)[n].norm() > tol || (*this)[-n].norm() > tol) return n;
        return 0;
    }

    double l2_norm2() const {
        double s = 0.0;
        for (const auto& A : c_) s += fro2(A);
        return s;
    }

    // max_n |U_n^* - U_{-n}|
    double hermitian_defect() const {
        double e = 0.0;
        for (int n = 0; n <= N_; ++n) e = std::max(e, ((*this)[n].adjoint() - (*this)[-n]).norm());
        return e;
    }

    FourierSeries& operator+=(const FourierSeries& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    FourierSeries& operator-=(const FourierSeries& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    FourierSeries& operator*=(cplx s) {
        for (auto& A : c_) A *= s;
        return *this;
    }
    friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
    friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }
    friend FourierSeries operator*(cplx s, FourierSeries a) { return a *= s; }

    unsigned flags = flag_none;

private:
    std::size_t index(int n) const {
        if (std::abs(n) > N_) throw DomainError("mode " + std::to_string(n) + " outside cutoff " + std::to_string(N_));
        return static_cast<std::size_t>(n + N_);
    }
    void check_same(const FourierSeries& o) const {
        if (o.d_ != d_ || o.N_ != N_) throw DomainError("series shape mismatch");
    }

    int d_ = 1;
    int N_ = 0;
    std::vector<Mat> c_;
};

// Nonnegative-frequency part, modes 0..N.
class HardyElement {
public:
    HardyElement() = default;
    HardyElement(int d, int N) : d_(d), N_(N), c_(static_cast<std::size_t>(N + 1), Mat::Zero(d, d)) {
        if (d < 1 || N < 0) throw DomainError("HardyElement needs d >= 1 and N >= 0");
    }

    static HardyElement constant(const Mat& A, int N) {
        HardyElement F(static_cast<int>(A.rows()), N);
        F[0] = A;
        return F;
    }

    int d() const { return d_; }
    int N() const { return N_; }
    Mat& operator[](int n) { return c_.at(static_cast<std::size_t>(n)); }
    const Mat& operator[](int n) const { return c_.at(static_cast<std::size_t>(n)); }
    const std::vector<Mat>& coeffs() const { return c_; }

    double norm2() const {
        double s = 0.0;
        for (const auto& A : c_) s += fro2(A);
        return s;
    }

    // stacked coordinates: block n holds vec(F_n) row-major
    Vec to_vec() const {
        const int b = d_ * d_;
        Vec v(static_cast<Eigen::Index>(b) * (N_ + 1));
        for (int n = 0; n <= N_; ++n) v.segment(static_cast<Eigen::Index>(n) * b, b) = vec_rowmajor(c_[n]);
        return v;
    }

    static HardyElement from_vec(const Eigen::Ref<const Vec>& v, int d) {
        const int b = d * d;
        if (v.size() % b != 0 || v.size() == 0) throw DomainError("coordinate length not a multiple of d^2");
        HardyElement F(d, static_cast<int>(v.size() / b) - 1);
        for (int n = 0; n <= F.N_; ++n) F.c_[n] = unvec_rowmajor(v.segment(static_cast<Eigen::Index>(n) * b, b), d);
        return F;
    }

    unsigned flags = flag_none;

private:
    int d_ = 1;
    int N_ = 0;
    std::vector<Mat> c_;
};

struct GridSamples {
    int d = 1;
    std::vector<Mat> values;
    int M() const { return static_cast<int>(values.size()); }
    double theta(int j) const { return 2.0 * pi * j / M(); }
};

inline HardyElement project_plus(const FourierSeries& F) {
    HardyElement P(F.d(), F.N());
    for (int n = 0; n <= F.N(); ++n) P[n] = F[n];
    P.flags = F.flags;
    return P;
}

// Pi_- U as a two-sided series (nonnegative modes zeroed)
inline FourierSeries project_minus(const FourierSeries& F) {
    FourierSeries G(F.d(), F.N());
    for (int n = 1; n <= F.N(); ++n) G[-n] = F[-n];
    return G;
}

inline FourierSeries to_series(const HardyElement& F) {
    FourierSeries G(F.d(), F.N());
    for (int n = 0; n <= F.N(); ++n) G[n] = F[n];
    G.flags = F.flags;
    return G;
}

// z F(z); the top mode falls off the truncation and marks the result
inline HardyElement shift_forward(const HardyElement& F) {
    HardyElement G(F.d(), F.N());
    for (int n = 1; n <= F.N(); ++n) G[n] = F[n - 1];
    G.flags = F.flags;
    if (fro2(F[F.N()]) > 0.0) G.flags |= flag_truncated;
    return G;
}

// (F(z) - F(0)) / z
inline HardyElement shift_backward(const HardyElement& F) {
    HardyElement G(F.d(), F.N());
    for (int n = 0; n < F.N(); ++n) G[n] = F[n + 1];
    G.flags = F.flags;
    return G;
}

inline Mat mean(const HardyElement& F) { return F[0]; }
inline Mat mean(const FourierSeries& F) { return F[0]; }

inline cplx inner(const HardyElement& F, const HardyElement& G) {
    if (F.d() != G.d() || F.N() != G.N()) throw DomainError("inner product shape mismatch");
    cplx s = 0.0;
    for (int n = 0; n <= F.N(); ++n) s += (G[n].adjoint() * F[n]).trace();
    return s;
}

enum class DerivKind { abs, signed_ };

inline FourierSeries fractional_derivative(const FourierSeries& F, DerivKind kind) {
    FourierSeries G(F.d(), F.N());
    for (int n = -F.N(); n <= F.N(); ++n) G[n] = static_cast<double>(kind == DerivKind::abs ? std::abs(n) : n) * F[n];
    return G;
}

// 1/2 sum |n| |U_n|^2, measure d theta / 2 pi
inline double sobolev_energy(const FourierSeries& U) {
    double s = 0.0;
    for (int n = 1; n <= U.N(); ++n) s += n * (fro2(U[n]) + fro2(U[-n]));
    return 0.5 * s;
}

inline double hdot_half_norm2(const FourierSeries& U) { return 2.0 * sobolev_energy(U); }

// inhomogeneous norm, weight (1 + n^2)^{1/2}
inline double h_half_norm(const FourierSeries& U) {
    double s = 0.0;
    for (int n = -U.N(); n <= U.N(); ++n) s += std::sqrt(1.0 + double(n) * n) * fro2(U[n]);
    return std::sqrt(s);
}

// Dense DFT pair between modes -N..N and M equispaced points.
class Dft {
public:
    Dft(int M, int N) : M_(M), N_(N), E_(M, 2 * N + 1) {
        if (M < 1 || N < 0) throw DomainError("bad DFT size");
        std::vector<cplx> roots(static_cast<std::size_t>(M));
        for (int k = 0; k < M; ++k) roots[k] = std::polar(1.0, 2.0 * pi * k / M);
        for (int j = 0; j < M; ++j)
            for (int n = -N; n <= N; ++n) {
                long long k = (static_cast<long long>(n) * j) % M;
                if (k < 0) k += M;
                E_(j, n + N) = roots[static_cast<std::size_t>(k)];
            }
    }

    int M() const { return M_; }
    int N() const { return N_; }
    bool aliasing() const { return M_ < 2 * N_ + 1; }

    // rows = modes, cols = row-major matrix entries
    static Mat stack(const FourierSeries& F) {
        const int b = F.d() * F.d();
        Mat C(2 * F.N() + 1, b);
        for (int n = -F.N(); n <= F.N(); ++n) C.row(n + F.N()) = vec_rowmajor(F[n]).transpose();
        return C;
    }

    Mat to_grid(const Mat& C) const { return E_ * C; }
    Mat to_modes(const Mat& G) const { return (E_.adjoint() * G) / static_cast<double>(M_); }

    GridSamples evaluate(const FourierSeries& F) const {
        if (F.N() != N_) throw DomainError("DFT cutoff mismatch");
        Mat G = to_grid(stack(F));
        GridSamples S;
        S.d = F.d();
        S.values.reserve(static_cast<std::size_t>(M_));
        for (int j = 0; j < M_; ++j) S.values.push_back(unvec_rowmajor(G.row(j).transpose(), F.d()));
        return S;
    }

    FourierSeries fit(const GridSamples& S) const {
        if (S.M() != M_) throw DomainError("DFT grid mismatch");
        const int b = S.d * S.d;
        Mat G(M_, b);
        for (int j = 0; j < M_; ++j) G.row(j) = vec_rowmajor(S.values[j]).transpose();
        Mat C = to_modes(G);
        FourierSeries F(S.d, N_);
        for (int n = -N_; n <= N_; ++n) F[n] = unvec_rowmajor(C.row(n + N_).transpose(), S.d);
        if (aliasing()) F.flags |= flag_aliased;
        return F;
    }

private:
    int M_;
    int N_;
    Mat E_;
};

inline GridSamples evaluate_grid(const FourierSeries& F, int M) { return Dft(M, F.N()).evaluate(F); }

// Least-squares fit onto modes -N..N; sets flag_aliased when M < 2N+1.
inline FourierSeries fit_series(const GridSamples& G, int N) { return Dft(G.M(), N).fit(G); }

inline Mat evaluate_at(const FourierSeries& F, double theta) {
    Mat A = Mat::Zero(F.d(), F.d());
    for (int n = -F.N(); n <= F.N(); ++n) A += std::polar(1.0, n * theta) * F[n];
    return A;
}

// Horner evaluation of sum F_n z^n
inline Mat evaluate_at(const HardyElement& F, cplx z) {
    Mat A = F[F.N()];
    for (int n = F.N() - 1; n >= 0; --n) A = (A * z + F[n]).eval();
    return A;
}

// M((I - z S*)^{-1} F) by back substitution on the bidiagonal system x - z S* x = F.
inline Mat reproduce_check(const HardyElement& F, cplx z) {
    if (std::abs(z) >= 1.0) throw DomainError("reproducing formula needs |z| < 1");
    Mat x = F[F.N()];
    for (int n = F.N() - 1; n >= 0; --n) x = (F[n] + z * x).eval();
    return x;
}

} // namespace hwm
