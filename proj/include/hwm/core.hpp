#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hwm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I_unit{0.0, 1.0};

// Base of everything the library throws on bad numerics or bad input.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct CutoffTooSmall : Error {
    explicit CutoffTooSmall(const std::string& w) : Error("cutoff-too-small", w) {}
};
struct GapCollapse : Error {
    explicit GapCollapse(const std::string& w) : Error("gap-collapse", w) {}
};
struct NotRational : Error {
    explicit NotRational(const std::string& w) : Error("not-rational", w) {}
};
struct SpectralRadiusViolation : Error {
    explicit SpectralRadiusViolation(const std::string& w) : Error("spectral-radius-violation", w) {}
};
struct BlowUp : Error {
    explicit BlowUp(const std::string& w) : Error("blow-up", w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config", w) {}
};

inline double fro2(const Mat& A) { return A.squaredNorm(); }

// Left multiplication F -> A F on row-major vec(F).
inline Mat left_mult(const Mat& A) {
    const Eigen::Index d = A.rows();
    Mat K = Mat::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            if (A(i, k) != cplx(0.0))
                for (Eigen::Index j = 0; j < d; ++j) K(i * d + j, k * d + j) = A(i, k);
    return K;
}

inline Vec vec_rowmajor(const Mat& A) {
    Vec v(A.size());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) v(i * A.cols() + j) = A(i, j);
    return v;
}

inline Mat unvec_rowmajor(const Eigen::Ref<const Vec>& v, int d) {
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = v(i * d + j);
    return A;
}

} // namespace hwm
