#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <Eigen/Eigenvalues>

#include "grassmann.hpp"
#include "toeplitz.hpp"

namespace hwm {

enum class PlanMode { rational, truncated };

struct PlanOptions {
    int N = 32;             // operator truncation
    int N_out = 0;          // cap on output modes; 0 means 4096
    double tail_tol = 1e-12;
    double rank_tol = 1e-8;
    double gap_required = 1e3;
};

struct EvolutionPlan {
    PlanMode mode = PlanMode::rational;
    int k = 1;
    int N_out = 0;
    double tail_tol = 1e-12;
    FourierSeries U0;
    SubspaceFrame frame;
    RVec lambda;     // eigenvalues of T restricted
    Mat W;           // eigenvectors, columns
    double min_gap = 0.0;
    double reconstruction_residual = 0.0;
    std::vector<std::string> warnings;

    int dim() const { return frame.dim(); }

    Mat propagator(double t) const {
        Vec ph(lambda.size());
        for (Eigen::Index j = 0; j < lambda.size(); ++j) ph(j) = std::polar(1.0, -t * lambda(j));
        return W * ph.asDiagonal() * W.adjoint();
    }
    // e^{-itT} S* restricted
    Mat contraction(double t) const { return propagator(t) * frame.SK; }
};

inline EvolutionPlan make_plan(const GrassmannLoop& U0, PlanMode mode, const PlanOptions& opt = {}) {
    EvolutionPlan p;
    p.mode = mode;
    p.k = U0.k;
    p.N_out = opt.N_out > 0 ? opt.N_out : 4096;
    p.tail_tol = opt.tail_tol;
    p.U0 = U0.series;
    p.frame = mode == PlanMode::rational ? invariant_subspace(U0.series, opt.N, opt.rank_tol, opt.gap_required)
                                         : full_frame(U0.series, opt.N);
    Mat TK = 0.5 * (p.frame.TK + p.frame.TK.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(TK);
    p.lambda = es.eigenvalues();
    p.W = es.eigenvectors();
    p.reconstruction_residual = (p.W * p.lambda.cast<cplx>().asDiagonal() * p.W.adjoint() - p.frame.TK).norm();
    p.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 1; j < p.lambda.size(); ++j) p.min_gap = std::min(p.min_gap, p.lambda(j) - p.lambda(j - 1));
    // coinciding eigenvalues only matter through their common phase, so the
    // propagator W e^{-it lambda} W* is already the merged-projector form
    if (p.min_gap < 1e-12) p.warnings.push_back("degenerate-eigenvalue");
    if (mode == PlanMode::rational && (p.frame.invariance_T > 1e-8 || p.frame.invariance_S > 1e-8))
        p.warnings.push_back("invariance-residual");
    return p;
}

// n-th Taylor coefficient of Pi U(t, z)
inline Mat fourier_coefficient(const EvolutionPlan& p, double t, int n) {
    if (n < 0) throw DomainError("negative mode");
    Mat A = p.contraction(t);
    Vec x = p.frame.c0;
    for (int j = 0; j < n; ++j) x = A * x;
    return unvec_rowmajor(p.frame.mean_map * x, p.frame.d);
}

struct ExplicitSeries {
    FourierSeries U;
    int n_modes_used = 0;
    double tail = 0.0;   // |A^n c0| at stop, bounds the omitted Fourier mass
    bool capped = false;
};

// U(t) = Pi U(t) + (Pi U(t))* - M(U0). Modes are generated until the exact
// remaining mass |A^n c0| drops below tail_tol or the cap N_out is hit; the
// output cutoff is the number of modes used.
inline ExplicitSeries explicit_series(const EvolutionPlan& p, double t) {
    const int d = p.frame.d;
    ExplicitSeries r;
    Mat A = p.contraction(t);
    Vec x = p.frame.c0;
    Mat X0 = unvec_rowmajor(p.frame.mean_map * x, d);
    std::vector<Mat> pos{X0 + X0.adjoint() - p.U0[0]};
    while (true) {
        x = A * x;
        r.tail = x.norm();
        if (r.tail < p.tail_tol) break;
        if (static_cast<int>(pos.size()) > p.N_out) {
            r.capped = true;
            break;
        }
        pos.push_back(unvec_rowmajor(p.frame.mean_map * x, d));
    }
    r.n_modes_used = static_cast<int>(pos.size()) - 1;
    r.U = FourierSeries(d, r.n_modes_used);
    r.U[0] = pos[0];
    for (int n = 1; n <= r.n_modes_used; ++n) {
        r.U[n] = pos[static_cast<std::size_t>(n)];
        r.U[-n] = pos[static_cast<std::size_t>(n)].adjoint();
    }
    if (r.capped) r.U.flags |= flag_truncated;
    return r;
}

struct ContractionSpectrum {
    std::vector<cplx> eigenvalues;
    double radius = 0.0;
};

inline ContractionSpectrum contraction_spectrum(const EvolutionPlan& p, double t, bool throw_on_violation = true) {
    ContractionSpectrum s;
    Mat A = p.contraction(t);
    if (A.rows() == 0) return s;
    Eigen::ComplexEigenSolver<Mat> es(A, false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        s.eigenvalues.push_back(es.eigenvalues()(j));
        s.radius = std::max(s.radius, std::abs(es.eigenvalues()(j)));
    }
    if (throw_on_violation && p.mode == PlanMode::rational && s.radius >= 1.0)
        throw SpectralRadiusViolation("r(t) = " + std::to_string(s.radius) + " at t = " + std::to_string(t));
    return s;
}

struct TrajectorySample {
    double t = 0.0;
    GrassmannLoop loop;
    double energy = 0.0;
    Mat mean;
    double constraint_residual = 0.0;
    double spectral_radius = 0.0;
    int n_modes_used = 0;
    double tail = 0.0;
    std::vector<std::string> warnings;
};

inline TrajectorySample solve_at_time(const EvolutionPlan& p, double t, bool with_radius = true) {
    TrajectorySample s;
    s.t = t;
    auto e = explicit_series(p, t);
    s.n_modes_used = e.n_modes_used;
    s.tail = e.tail;
    if (e.capped) s.warnings.push_back("output-cap-reached");
    s.loop = make_loop(std::move(e.U), p.k);
    s.energy = sobolev_energy(s.loop.series);
    s.mean = s.loop.series[0];
    s.constraint_residual = s.loop.grid_check;
    if (with_radius) {
        s.spectral_radius = contraction_spectrum(p, t, false).radius;
        if (s.spectral_radius > 1.0 - 1e-3) s.warnings.push_back("slow-decay");
    }
    return s;
}

struct IsospectralityReport {
    std::vector<double> reference;  // interior eigenvalues at t = 0
    std::vector<double> times;
    std::vector<std::vector<double>> evolved;
    double max_deviation = 0.0;     // infinite when counts differ
};

inline IsospectralityReport lax_isospectrality_check(const EvolutionPlan& p, const std::vector<double>& times,
                                                     int N, double delta = 1e-6, double rank_tol = 1e-8) {
    IsospectralityReport r;
    r.reference = interior_eigenvalues(hankel_range_spectrum(p.U0, N, rank_tol), delta);
    for (double t : times) {
        auto U = explicit_series(p, t).U;
        auto ev = interior_eigenvalues(hankel_range_spectrum(U, N, rank_tol), delta);
        r.times.push_back(t);
        if (ev.size() != r.reference.size()) {
            r.max_deviation = INFINITY;
        } else {
            for (std::size_t j = 0; j < ev.size(); ++j)
                r.max_deviation = std::max(r.max_deviation, std::abs(ev[j] - r.reference[j]));
        }
        r.evolved.push_back(std::move(ev));
    }
    return r;
}

struct ConservationRow {
    double t = 0.0;
    double energy = 0.0;
    Mat mean;
    double I1 = 0.0;
    double I2 = 0.0;
    int rank = 0;
    double constraint_residual = 0.0;
};

inline std::vector<ConservationRow> conservation_report(const EvolutionPlan& p, const std::vector<double>& times, int N_rank,
                                                        double rank_tol = 1e-8) {
    std::vector<ConservationRow> rows;
    for (double t : times) {
        auto s = solve_at_time(p, t, false);
        ConservationRow c;
        c.t = t;
        c.energy = s.energy;
        c.mean = s.mean;
        auto k = kronecker_rank(s.loop.series, N_rank, rank_tol);  // one SVD serves all three
        c.I1 = schatten_from_singular_values(k.singular_values, s.loop.series.d(), 1.0);
        c.I2 = schatten_from_singular_values(k.singular_values, s.loop.series.d(), 2.0);
        c.rank = k.rank;
        c.constraint_residual = s.constraint_residual;
        rows.push_back(std::move(c));
    }
    return rows;
}

// Coefficients of U(t) F = M((I - z A)^{-1} F) for F given in frame coordinates.
inline std::vector<Vec> u_map_coefficients(const EvolutionPlan& p, double t, const Vec& F, int n_max) {
    Mat A = p.contraction(t);
    std::vector<Vec> c;
    Vec x = F;
    for (int n = 0; n < n_max; ++n) {
        c.push_back(p.frame.mean_map * x);
        x = A * x;
    }
    return c;
}

struct IntertwiningReport {
    double residual = 0.0;  // |S* U(t) F - U(t) e^{-itT} S* F|
    double isometry = 0.0;  // | |U(t) F|^2 - |F|^2 |
};

inline IntertwiningReport intertwining_check(const EvolutionPlan& p, double t, const std::vector<Vec>& Fs, int n_max = 0) {
    if (n_max <= 0) n_max = std::max(4 * p.dim(), 64);
    Mat A = p.contraction(t);
    IntertwiningReport r;
    for (const auto& F : Fs) {
        auto lhs = u_map_coefficients(p, t, F, n_max + 1);
        auto rhs = u_map_coefficients(p, t, A * F, n_max);
        double e2 = 0.0, n2 = 0.0;
        for (int n = 0; n < n_max; ++n) e2 += (lhs[n + 1] - rhs[n]).squaredNorm();
        for (const auto& c : lhs) n2 += c.squaredNorm();
        r.residual = std::max(r.residual, std::sqrt(e2));
        r.isometry = std::max(r.isometry, std::abs(n2 - F.squaredNorm()));
    }
    return r;
}

struct LaxResidual {
    double residual = 0.0;     // interior |(T(t+h) - T(t-h))/2h - [B, T]|
    double derivative = 0.0;   // interior |dT/dt| estimate, for scale
    int interior_modes = 0;
};

inline LaxResidual lax_residual(const EvolutionPlan& p, double t, double h, int N, int sign = +1) {
    auto Um = explicit_series(p, t - h).U;
    auto U0 = explicit_series(p, t).U;
    auto Up = explicit_series(p, t + h).U;
    Mat Tm = build_toeplitz(Um, N).M;
    Mat T0 = build_toeplitz(U0, N).M;
    Mat Tp = build_toeplitz(Up, N).M;
    Mat B = build_b_operator(U0, N, sign);
    Mat dT = (Tp - Tm) / (2.0 * h);
    Mat R = dT - (B * T0 - T0 * B);
    LaxResidual r;
    const int band = std::max({effective_bandwidth(Um, 1e-13), effective_bandwidth(U0, 1e-13), effective_bandwidth(Up, 1e-13), 1});
    r.interior_modes = N - 2 * band - 1;
    r.residual = interior_norm(R, p.frame.d, r.interior_modes);
    r.derivative = interior_norm(dT, p.frame.d, r.interior_modes);
    return r;
}

// H^1 norm, weight (1 + n^2)
inline double h_one_norm(const FourierSeries& U) {
    double s = 0.0;
    for (int n = -U.N(); n <= U.N(); ++n) s += (1.0 + double(n) * n) * fro2(U[n]);
    return std::sqrt(s);
}

inline double h_half_distance(const FourierSeries& A, const FourierSeries& B) {
    const int N = std::max(A.N(), B.N());
    return h_half_norm(A.resized(N) - B.resized(N));
}

struct RecurrenceResult {
    bool found = false;
    double t_star = 0.0;
    double distance = 0.0;
    double threshold = 0.0;
    RVec lambda;
    double sup_h_half = 0.0;
    double sup_h_one = 0.0;
    int scanned = 0;
};

// First t* in (0, horizon] with |U(t*) - U0|_{H^1/2} <= eps_rel |U0|_{H^1/2}.
// Coarse scan, then Brent refinement around each coarse local minimum.
inline RecurrenceResult recurrence_search(const EvolutionPlan& p, double horizon, double eps_rel = 1e-3, double coarse_dt = 0.05) {
    RecurrenceResult r;
    r.lambda = p.lambda;
    const FourierSeries& U0 = p.U0;
    r.threshold = eps_rel * h_half_norm(U0);
    auto dist = [&](double t) { return h_half_distance(explicit_series(p, t).U, U0); };

    const int n = static_cast<int>(std::ceil(horizon / coarse_dt));
    std::vector<double> ts, ds;
    ts.reserve(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        double t = std::min(j * coarse_dt, horizon);
        auto U = explicit_series(p, t).U;
        r.sup_h_half = std::max(r.sup_h_half, h_half_norm(U));
        r.sup_h_one = std::max(r.sup_h_one, h_one_norm(U));
        ts.push_back(t);
        ds.push_back(h_half_distance(U, U0));
        ++r.scanned;
        if (j >= 2) {
            const std::size_t i = ts.size() - 2;
            if (ds[i] <= ds[i - 1] && ds[i] <= ds[i + 1]) {
                double best_t = ts[i], best_d = ds[i];
                if (best_d > r.threshold) {
                    auto m = boost::math::tools::brent_find_minima(dist, ts[i - 1], ts[i + 1], 40);
                    best_t = m.first;
                    best_d = m.second;
                }
                if (best_d <= r.threshold) {
                    r.found = true;
                    r.t_star = best_t;
                    r.distance = best_d;
                    return r;
                }
            }
        }
    }
    return r;
}

} // namespace hwm
