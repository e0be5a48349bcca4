#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "evolution.hpp"
#include "grassmann.hpp"
#include "hardy.hpp"

namespace hwm {

// Method of lines for dU/dt = -(i/2)[U, |D|U], products on a 3x padded grid.
class PseudoSpectral {
public:
    explicit PseudoSpectral(int N) : N_(N), dft_(3 * (2 * N + 1), N) {}

    int N() const { return N_; }
    int grid_size() const { return dft_.M(); }

    FourierSeries rhs(const FourierSeries& U, double* sup_entry = nullptr) const {
        if (U.N() != N_) throw DomainError("rhs: cutoff mismatch");
        const int d = U.d();
        Mat Cu = Dft::stack(U);
        Mat Cd = Dft::stack(fractional_derivative(U, DerivKind::abs));
        Mat Gu = dft_.to_grid(Cu);
        Mat Gd = dft_.to_grid(Cd);
        Mat Gr(Gu.rows(), Gu.cols());
        double sup = 0.0;
        for (Eigen::Index j = 0; j < Gu.rows(); ++j) {
            Mat A = unvec_rowmajor(Gu.row(j).transpose(), d);
            Mat B = unvec_rowmajor(Gd.row(j).transpose(), d);
            sup = std::max(sup, A.cwiseAbs().maxCoeff());
            Gr.row(j) = vec_rowmajor(-0.5 * I_unit * (A * B - B * A)).transpose();
        }
        if (sup_entry) *sup_entry = sup;
        Mat C = dft_.to_modes(Gr);
        FourierSeries R(d, N_);
        for (int n = -N_; n <= N_; ++n) R[n] = unvec_rowmajor(C.row(n + N_).transpose(), d);
        symmetrize(R);
        return R;
    }

    static void symmetrize(FourierSeries& U) {
        for (int n = 0; n <= U.N(); ++n) {
            Mat s = 0.5 * (U[n] + U[-n].adjoint());
            U[n] = s;
            U[-n] = s.adjoint();
        }
    }

private:
    int N_;
    Dft dft_;
};

inline FourierSeries rhs(const GrassmannLoop& U) { return PseudoSpectral(U.series.N()).rhs(U.series); }

struct IntegratorStats {
    double constraint_drift = 0.0;
    double energy_drift = 0.0;
    long steps = 0;
};

struct IntegratorState {
    GrassmannLoop loop;
    double t = 0.0;
    double dt = 0.0;
    IntegratorStats stats;
};

class Rk4 {
public:
    Rk4(int N, double blowup = 2.0) : ps_(N), blowup_(blowup) {}

    const PseudoSpectral& scheme() const { return ps_; }

    FourierSeries step(const FourierSeries& U, double dt) const {
        double sup = 0.0;
        FourierSeries k1 = ps_.rhs(U, &sup);
        if (sup > blowup_) throw BlowUp("sup |U| = " + std::to_string(sup));
        FourierSeries k2 = ps_.rhs(U + (0.5 * dt) * k1);
        FourierSeries k3 = ps_.rhs(U + (0.5 * dt) * k2);
        FourierSeries k4 = ps_.rhs(U + dt * k3);
        FourierSeries V = U + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        PseudoSpectral::symmetrize(V);
        return V;
    }

private:
    PseudoSpectral ps_;
    double blowup_;
};

// One step; diagnostics recomputed from the new loop.
inline IntegratorState step_rk4(const IntegratorState& s, double dt, bool renormalize = false, double energy0 = NAN) {
    Rk4 rk(s.loop.series.N());
    IntegratorState out;
    FourierSeries V = rk.step(s.loop.series, dt);
    out.loop = renormalize ? project_to_grassmann(V, s.loop.d, s.loop.k) : make_loop(std::move(V), s.loop.k);
    out.t = s.t + dt;
    out.dt = dt;
    out.stats = s.stats;
    ++out.stats.steps;
    out.stats.constraint_drift = std::max(out.stats.constraint_drift, out.loop.grid_check);
    if (!std::isnan(energy0))
        out.stats.energy_drift = std::max(out.stats.energy_drift, std::abs(sobolev_energy(out.loop.series) - energy0));
    return out;
}

// Integrates to T_end with fixed dt (last step shortened); records every
// record_every steps plus the final state. observer(t, U) sees every step.
inline std::vector<IntegratorState> integrate(const GrassmannLoop& U0, double T_end, double dt, bool renormalize = false,
                                              int record_every = 1,
                                              const std::function<void(double, const FourierSeries&)>& observer = {}) {
    if (dt <= 0.0) throw DomainError("dt must be positive");
    Rk4 rk(U0.series.N());
    const double E0 = sobolev_energy(U0.series);
    std::vector<IntegratorState> traj;
    IntegratorState s;
    s.loop = U0;
    s.dt = dt;
    traj.push_back(s);
    if (observer) observer(0.0, s.loop.series);
    const long n_steps = static_cast<long>(std::ceil(T_end / dt - 1e-9));
    FourierSeries U = U0.series;
    for (long j = 1; j <= n_steps; ++j) {
        const double h = std::min(dt, T_end - (j - 1) * dt);
        U = rk.step(U, h);
        if (renormalize) U = project_to_grassmann(U, U0.d, U0.k).series;
        s.t = (j == n_steps) ? T_end : j * dt;
        ++s.stats.steps;
        s.stats.energy_drift = std::max(s.stats.energy_drift, std::abs(sobolev_energy(U) - E0));
        if (observer) observer(s.t, U);
        if (j % record_every == 0 || j == n_steps) {
            s.loop = make_loop(U, U0.k);
            s.stats.constraint_drift = std::max(s.stats.constraint_drift, s.loop.grid_check);
            traj.push_back(s);
        }
    }
    return traj;
}

inline double l2_distance(const FourierSeries& A, const FourierSeries& B) {
    const int N = std::max(A.N(), B.N());
    return std::sqrt((A.resized(N) - B.resized(N)).l2_norm2());
}

struct CrossValidation {
    std::vector<double> t;
    std::vector<double> deviation;
    double max_deviation = 0.0;
    double integrator_energy_drift = 0.0;
    double explicit_energy_drift = 0.0;
};

inline CrossValidation cross_validate(const GrassmannLoop& U0, double T_end, double dt, int N, const PlanOptions& opt_in = {}) {
    PlanOptions opt = opt_in;
    opt.N = std::max(opt.N, N);
    auto plan = make_plan(U0, PlanMode::rational, opt);
    GrassmannLoop start = make_loop(U0.series.resized(N), U0.k);
    const double E0 = sobolev_energy(start.series);
    CrossValidation cv;
    integrate(start, T_end, dt, false, 1 << 30, [&](double t, const FourierSeries& U) {
        auto ex = explicit_series(plan, t).U;
        double dev = l2_distance(U, ex);
        cv.t.push_back(t);
        cv.deviation.push_back(dev);
        cv.max_deviation = std::max(cv.max_deviation, dev);
        cv.integrator_energy_drift = std::max(cv.integrator_energy_drift, std::abs(sobolev_energy(U) - E0));
        cv.explicit_energy_drift = std::max(cv.explicit_energy_drift, std::abs(sobolev_energy(ex) - E0));
    });
    return cv;
}

} // namespace hwm
