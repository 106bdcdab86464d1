#include "phasered/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "phasered/linalg.hpp"

namespace phasered {

namespace {

// Adjoint solves run in plain double arithmetic; extended precision only
// matters for resolving the orbit itself. Keep a sane floor on the
// relative tolerance so the caller's orbit settings do not push the
// double-precision core into its roundoff floor.
IntegratorConfig adjoint_cfg(const IntegratorConfig& cfg) {
    IntegratorConfig out = cfg;
    out.mode = StepMode::Adaptive;
    out.extended = false;
    out.rel_tol = std::max(cfg.rel_tol, 1e-12);
    out.abs_tol = std::max(cfg.abs_tol, 1e-300);
    return out;
}

double curve_sup(const std::vector<State>& rows) {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, sup_norm(r));
    return m;
}

}  // namespace

State ResponseCurve::at(double theta) const {
    const double th = wrap_angle(theta);
    const double pos = th / kTwoPi * grid_n;
    const int j = std::min((int)pos, grid_n - 1);
    const double f = pos - j;
    State out(values[j].size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - f) * values[j][i] + f * values[j + 1][i];
    return out;
}

namespace {

/// Cumulative divergence integral D(t) = int_0^t div F(gamma(s)) ds as a
/// dense trajectory over one period. D(T) = kT.
Trajectory divergence_integral(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                               const IntegratorConfig& icfg) {
    const double T = orbit.period();
    State gx(field.dimension);
    TimeRhs rhs = [&field, &orbit, T, &gx](double t, std::span<const double>,
                                           std::span<double> out) {
        double tw = std::fmod(t, T);
        if (tw < 0.0) tw += T;
        orbit.cycle().eval(tw, gx);
        out[0] = divergence_at(field, gx);
    };
    IntegratorConfig c = icfg;
    c.abs_tol = 1e-14;  // the integral starts at exactly 0
    return integrate_rhs(rhs, 1, {0.0}, 0.0, T, c);
}

/// Planar closed-form reduction: any adjoint solution decomposes over
/// {F, Fperp}. The PRC is Z = (omega F + b Fperp)/|F|^2 with
/// b = |F|^2 [c0 e^{kT - D(t)} + omega B(t)],
/// B' = -div B - h backward from B(T) = 0, h = F^T(DF+DF^T)Fperp/|F|^4,
/// c0 = omega B(0)/(1 - e^{kT}). Every factor stays well-scaled even when
/// the orbit hugs a saddle, unlike the backward iteration whose period map
/// is violently non-normal there.
ResponseCurve planar_prc_quadrature(const VectorFieldSpec& field,
                                    const PeriodicOrbit& orbit,
                                    const IntegratorConfig& cfg, int N) {
    if (field.dimension != 2)
        throw SolverError("compute_prc: planar quadrature fallback needs n = 2");
    const double T = orbit.period();
    const double omega = orbit.omega();
    const IntegratorConfig icfg = adjoint_cfg(cfg);

    Trajectory Dtraj = divergence_integral(field, orbit, icfg);
    const double kT = Dtraj.back()[0];
    const double lambda = std::exp(kT);
    if (!(std::abs(1.0 - lambda) > 1e-9))
        throw SolverError("compute_prc: |lambda| too close to 1");

    // h(t) along the orbit
    State gx(2), f(2);
    std::vector<double> jac(4);
    auto h_at = [&](double t) {
        double tw = std::fmod(t, T);
        if (tw < 0.0) tw += T;
        orbit.cycle().eval(tw, gx);
        field.rhs(gx, f);
        if (field.jacobian) {
            field.jacobian(gx, jac);
        } else {
            const auto j = jacobian_fd(field, gx);
            std::copy(j.begin(), j.end(), jac.begin());
        }
        const double fx = f[0], fy = f[1];
        const double px = -fy, py = fx;  // Fperp
        // F^T (DF + DF^T) Fperp
        const double sxx = 2.0 * jac[0], syy = 2.0 * jac[3], sxy = jac[1] + jac[2];
        const double quad = fx * (sxx * px + sxy * py) + fy * (sxy * px + syy * py);
        const double f2 = fx * fx + fy * fy;
        return quad / (f2 * f2);
    };

    // Backward auxiliary B(t) integrated in sigma = T - t.
    TimeRhs brhs = [&](double sigma, std::span<const double> b, std::span<double> out) {
        const double t = T - sigma;
        double tw = std::fmod(t, T);
        if (tw < 0.0) tw += T;
        orbit.cycle().eval(tw, gx);
        const double div = divergence_at(field, gx);
        out[0] = div * b[0] + h_at(t);
    };
    IntegratorConfig bcfg = icfg;
    bcfg.abs_tol = std::max(icfg.abs_tol, 1e-14);  // B starts at exactly 0
    Trajectory Btraj = integrate_rhs(brhs, 1, {0.0}, 0.0, T, bcfg);
    const double B0 = Btraj.back()[0];  // B(t=0)
    const double c0 = omega * B0 / (1.0 - lambda);

    ResponseCurve curve;
    curve.kind = CurveKind::PRC;
    curve.method = AdjointMethod::PlanarQuadrature;
    curve.grid_n = N;
    curve.omega = omega;
    curve.thetas.resize(N + 1);
    curve.values.assign(N + 1, State(2));
    State d1(1), b1(1);
    for (int j = 0; j <= N; ++j) {
        const double theta = kTwoPi * (double)j / (double)N;
        curve.thetas[j] = theta;
        const double t = std::min(theta / omega, T);
        orbit.cycle().eval(t, gx);
        field.rhs(gx, f);
        const double f2 = f[0] * f[0] + f[1] * f[1];
        Dtraj.eval(t, d1);
        Btraj.eval(std::clamp(T - t, 0.0, T), b1);
        const double b = f2 * (c0 * std::exp(kT - d1[0]) + omega * b1[0]);
        curve.values[j][0] = (omega * f[0] + b * (-f[1])) / f2;
        curve.values[j][1] = (omega * f[1] + b * f[0]) / f2;
    }
    curve.curve_scale = curve_sup(curve.values);
    double cl = 0.0;
    for (int i = 0; i < 2; ++i)
        cl = std::max(cl, std::abs(curve.values[N][i] - curve.values[0][i]));
    curve.closure_residual = cl;
    return curve;
}

/// Planar closed form for the IRC: I(t) = rho0 e^{k t - D(t)} Fperp(t),
/// evaluated in log space so spike-like curves cannot overflow.
ResponseCurve planar_irc_quadrature(const VectorFieldSpec& field,
                                    const PeriodicOrbit& orbit, double k_in,
                                    const State& v, const IntegratorConfig& cfg,
                                    const IrcOptions& opts) {
    if (field.dimension != 2)
        throw SolverError("compute_irc: planar quadrature fallback needs n = 2");
    const double T = orbit.period();
    const double omega = orbit.omega();
    const int N = opts.grid_n;
    const IntegratorConfig icfg = adjoint_cfg(cfg);

    Trajectory Dtraj = divergence_integral(field, orbit, icfg);
    const double k = Dtraj.back()[0] / T;
    if (std::abs(k - k_in) > std::max(0.02 * std::abs(k_in), 1e-8))
        throw SolverError("compute_irc: k inconsistent with the orbit");

    ResponseCurve curve;
    curve.kind = CurveKind::IRC;
    curve.method = AdjointMethod::PlanarQuadrature;
    curve.grid_n = N;
    curve.k = k;
    curve.v = v;
    curve.normalization = opts.normalization;
    curve.thetas.resize(N + 1);
    curve.values.assign(N + 1, State(2));

    std::vector<double> expo(N + 1);
    std::vector<State> fperp(N + 1, State(2));
    State gx(2), f(2), d1(1);
    for (int j = 0; j <= N; ++j) {
        const double theta = kTwoPi * (double)j / (double)N;
        curve.thetas[j] = theta;
        const double t = std::min(theta / omega, T);
        orbit.cycle().eval(t, gx);
        field.rhs(gx, f);
        Dtraj.eval(t, d1);
        expo[j] = k * t - d1[0];
        fperp[j][0] = -f[1];
        fperp[j][1] = f[0];
    }

    if (opts.normalization == IrcNormalization::EigenvectorUnit) {
        const double denom = dot(fperp[0], v);
        if (std::abs(denom) < 1e-6 * norm(fperp[0]))
            throw SolverError(
                "compute_irc: v nearly orthogonal to the periodic eigenvector; "
                "normalization ill-conditioned");
        double emax = -1e300;
        for (int j = 0; j <= N; ++j) emax = std::max(emax, expo[j]);
        if (emax - expo[0] > 600.0)
            throw SolverError(
                "compute_irc: unit normalization overflows for a spike-like curve; "
                "use max-abs normalization");
        for (int j = 0; j <= N; ++j) {
            const double fct = std::exp(expo[j] - expo[0]) / denom;
            curve.values[j][0] = fperp[j][0] * fct;
            curve.values[j][1] = fperp[j][1] * fct;
        }
    } else {
        double lmax = -1e300;
        for (int j = 0; j <= N; ++j) {
            const double m = sup_norm(fperp[j]);
            if (m > 0.0) lmax = std::max(lmax, expo[j] + std::log(m));
        }
        for (int j = 0; j <= N; ++j) {
            const double fct = std::exp(expo[j] - lmax);
            curve.values[j][0] = fperp[j][0] * fct;
            curve.values[j][1] = fperp[j][1] * fct;
        }
    }

    curve.curve_scale = curve_sup(curve.values);
    double cl = 0.0;
    for (int i = 0; i < 2; ++i)
        cl = std::max(cl, std::abs(curve.values[N][i] - curve.values[0][i]));
    curve.closure_residual = cl;
    return curve;
}

ResponseCurve prc_backward_iteration(const VectorFieldSpec& field,
                                     const PeriodicOrbit& orbit,
                                     const IntegratorConfig& cfg,
                                     const PrcOptions& opts) {
    const int n = field.dimension;
    const double T = orbit.period();
    const double omega = orbit.omega();
    const int N = opts.grid_n;
    const IntegratorConfig icfg = adjoint_cfg(cfg);

    // Backward time s = -t: dz/ds = +DF^T(gamma(-s)) z.
    std::vector<double> jac(n * n);
    State gx(n);
    TimeRhs rhs = [&field, &orbit, T, n, &jac, &gx](double s, std::span<const double> z,
                                                    std::span<double> out) {
        double tw = std::fmod(-s, T);
        if (tw < 0.0) tw += T;
        orbit.cycle().eval(tw, gx);
        if (field.jacobian) {
            field.jacobian(gx, jac);
        } else {
            const auto j = jacobian_fd(field, gx);
            std::copy(j.begin(), j.end(), jac.begin());
        }
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int jj = 0; jj < n; ++jj) acc += jac[jj * n + i] * z[jj];
            out[i] = acc;
        }
    };

    // Seed with the right neutral-mode projection: z0 . F = omega.
    State f0 = field.eval(orbit.anchor());
    const double f2 = dot(f0, f0);
    State z(n);
    for (int i = 0; i < n; ++i) z[i] = omega * f0[i] / f2;

    std::vector<State> grid(N + 1, State(n)), prev;
    std::vector<double> contraction;
    double prev_diff = -1.0;
    bool converged = false;
    int stubborn = 0;
    for (int p = 0; p < opts.max_periods; ++p) {
        const double s0 = p * T, s1 = (p + 1) * T;
        Trajectory traj = integrate_rhs(rhs, n, z, s0, s1, icfg);
        // theta_j corresponds to s = (p+1)T - theta_j/omega
        for (int j = 0; j <= N; ++j) {
            const double theta = kTwoPi * (double)j / (double)N;
            const double s = s1 - theta / omega;
            traj.eval(std::clamp(s, s0, s1), grid[j]);
        }
        z = traj.back();
        if (!prev.empty()) {
            double diff = 0.0;
            for (int j = 0; j <= N; ++j)
                for (int i = 0; i < n; ++i)
                    diff = std::max(diff, std::abs(grid[j][i] - prev[j][i]));
            const double scale = std::max(curve_sup(grid), 1e-300);
            if (prev_diff > 0.0 && prev_diff > 1e-300)
                contraction.push_back(diff / prev_diff);
            prev_diff = diff;
            if (diff <= opts.period_diff_tol * scale) {
                converged = true;
                prev = grid;
                break;
            }
            // A transient that refuses to contract signals a period map too
            // ill-conditioned for the iteration; bail out early.
            stubborn = (diff > 0.25 * scale) ? stubborn + 1 : 0;
            if (stubborn >= 8) break;
        }
        prev = grid;
    }
    if (!converged)
        throw SolverError(
            "compute_prc: backward solve not periodic within the period cap "
            "(|lambda| too close to 1?)");

    // Single-constant rescale: Z(0) . F(gamma(0)) = omega.
    const double z0f = dot(grid[0], f0);
    if (!(std::abs(z0f) > 0.0)) throw SolverError("compute_prc: degenerate normalization");
    const double c = omega / z0f;
    for (auto& row : grid)
        for (double& vv : row) vv *= c;

    ResponseCurve curve;
    curve.kind = CurveKind::PRC;
    curve.grid_n = N;
    curve.thetas.resize(N + 1);
    for (int j = 0; j <= N; ++j) curve.thetas[j] = kTwoPi * (double)j / (double)N;
    curve.values = std::move(grid);
    curve.omega = omega;
    curve.curve_scale = curve_sup(curve.values);
    double cl = 0.0;
    for (int i = 0; i < n; ++i)
        cl = std::max(cl, std::abs(curve.values[N][i] - curve.values[0][i]));
    curve.closure_residual = cl;
    curve.contraction_factors = std::move(contraction);
    curve.method = AdjointMethod::BackwardIteration;
    return curve;
}

}  // namespace

ResponseCurve compute_prc(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          const IntegratorConfig& cfg, const PrcOptions& opts) {
    try {
        return prc_backward_iteration(field, orbit, cfg, opts);
    } catch (const SolverError&) {
        // Near-homoclinic orbits make the adjoint period map so non-normal
        // that the backward iteration cannot isolate the neutral mode in
        // finite precision; the planar closed-form reduction is exact there.
        if (field.dimension != 2) throw;
        return planar_prc_quadrature(field, orbit, cfg, opts.grid_n);
    }
}

namespace {

/// One-period propagation of the IRC linear system on the theta grid with
/// overflow-safe rescaling. Records (raw value, accumulated log scale) at
/// each grid node; true value = raw * exp(logscale).
struct GridPropagation {
    std::vector<State> raw;
    std::vector<double> logscale;
    State w_end;
    double ls_end = 0.0;
};

GridPropagation propagate_irc_period(const VectorFieldSpec& field,
                                     const PeriodicOrbit& orbit, double k,
                                     const State& w0, int N,
                                     const IntegratorConfig& icfg) {
    const int n = field.dimension;
    const double T = orbit.period();
    std::vector<double> jac(n * n);
    State gx(n);
    TimeRhs rhs = [&field, &orbit, T, n, k, &jac, &gx](double t, std::span<const double> w,
                                                       std::span<double> out) {
        double tw = std::fmod(t, T);
        if (tw < 0.0) tw += T;
        orbit.cycle().eval(tw, gx);
        if (field.jacobian) {
            field.jacobian(gx, jac);
        } else {
            const auto j = jacobian_fd(field, gx);
            std::copy(j.begin(), j.end(), jac.begin());
        }
        for (int i = 0; i < n; ++i) {
            double acc = k * w[i];
            for (int jj = 0; jj < n; ++jj) acc -= jac[jj * n + i] * w[jj];
            out[i] = acc;
        }
    };

    GridPropagation out;
    out.raw.resize(N + 1);
    out.logscale.resize(N + 1);
    State w = w0;
    double ls = 0.0;
    out.raw[0] = w;
    out.logscale[0] = 0.0;
    for (int j = 1; j <= N; ++j) {
        const double t0 = T * (double)(j - 1) / (double)N;
        const double t1 = T * (double)j / (double)N;
        Trajectory seg = integrate_rhs(rhs, n, w, t0, t1, icfg);
        w = seg.back();
        out.raw[j] = w;
        out.logscale[j] = ls;
        const double mag = sup_norm(w);
        if (mag > 1e150) {  // keep headroom; the system is linear
            for (double& vv : w) vv /= mag;
            ls += std::log(mag);
        } else if (mag > 0.0 && mag < 1e-150) {
            for (double& vv : w) vv /= mag;
            ls += std::log(mag);
        }
    }
    out.w_end = w;
    out.ls_end = ls;
    return out;
}

}  // namespace

namespace {

ResponseCurve irc_period_map_eigen(const VectorFieldSpec& field,
                                   const PeriodicOrbit& orbit, double k,
                                   const State& v, const IntegratorConfig& cfg,
                                   const IrcOptions& opts) {
    const int n = field.dimension;
    const double T = orbit.period();
    const int N = opts.grid_n;
    const IntegratorConfig icfg = adjoint_cfg(cfg);
    if ((int)v.size() != n) throw SolverError("compute_irc: eigenvector dimension mismatch");

    // Initial direction: eigenvector of the period map with eigenvalue
    // nearest 1 when the fundamental matrix is representable; otherwise the
    // power iteration below finds it (strongly stable systems, where the
    // other mode dies within one period anyway).
    State w(n, 0.0);
    bool have_eigen = false;
    {
        std::vector<double> phi(n * n);
        bool overflow = false;
        for (int col = 0; col < n && !overflow; ++col) {
            State e(n, 0.0);
            e[col] = 1.0;
            GridPropagation p = propagate_irc_period(field, orbit, k, e, 64, icfg);
            if (p.ls_end != 0.0 || sup_norm(p.w_end) > 1e200) {
                overflow = true;
                break;
            }
            for (int i = 0; i < n; ++i) phi[i * n + col] = p.w_end[i];
        }
        if (!overflow) {
            if (n == 2) {
                Eigen2 eg;
                if (eigen2(phi[0], phi[1], phi[2], phi[3], eg)) {
                    const bool first =
                        std::abs(eg.lambda1 - 1.0) <= std::abs(eg.lambda2 - 1.0);
                    w[0] = first ? eg.v1[0] : eg.v2[0];
                    w[1] = first ? eg.v1[1] : eg.v2[1];
                    have_eigen = true;
                }
            } else {
                // inverse iteration with shift 1
                State y(n, 1.0 / std::sqrt((double)n));
                for (int it = 0; it < 50; ++it) {
                    std::vector<double> m = phi;
                    for (int i = 0; i < n; ++i) m[i * n + i] -= 1.0 + 1e-12;
                    std::vector<double> rhs_v(y.begin(), y.end());
                    solve_dense(m, rhs_v);
                    double nn = 0.0;
                    for (double vv : rhs_v) nn += vv * vv;
                    nn = std::sqrt(nn);
                    for (int i = 0; i < n; ++i) y[i] = rhs_v[i] / nn;
                }
                w = y;
                have_eigen = true;
            }
        }
    }
    if (!have_eigen) w = v;  // seed for the power iteration
    {
        const double wn = norm(w);
        if (!(wn > 0.0)) throw SolverError("compute_irc: degenerate eigenvector seed");
        for (double& vv : w) vv /= wn;
    }

    // Power-polish the direction and measure the dominant multiplier; a
    // multiplier off 1 means the supplied k is off by log(m)/T, which is
    // corrected within a small consistency budget.
    const double k_in = k;
    double defect = 1e300;
    for (int ref = 0; ref <= opts.max_refinements; ++ref) {
        GridPropagation p = propagate_irc_period(field, orbit, k, w, 64, icfg);
        const double wn = norm(p.w_end);
        if (!(wn > 0.0)) throw SolverError("compute_irc: propagated vector vanished");
        const double aligned = dot(p.w_end, w);
        if (!(aligned != 0.0)) throw SolverError("compute_irc: direction degenerate");
        const double m_log = p.ls_end + std::log(std::abs(aligned));
        const double m = (aligned > 0.0 ? 1.0 : -1.0) * std::exp(m_log);
        defect = std::abs(m - 1.0);
        for (int i = 0; i < n; ++i) w[i] = p.w_end[i] / wn;
        if (defect <= opts.defect_tol) break;
        if (!(m > 0.0))
            throw SolverError("compute_irc: negative period-map multiplier");
        k -= std::log(m) / T;
    }
    if (defect > opts.defect_tol)
        throw SolverError(
            "compute_irc: eigenvalue-1 defect exceeds tolerance (k inconsistent with "
            "the orbit)");
    if (std::abs(k - k_in) > std::max(0.02 * std::abs(k_in), 1e-8))
        throw SolverError("compute_irc: k inconsistent with the orbit");

    // Full-resolution pass over the grid from the converged direction.
    GridPropagation p = propagate_irc_period(field, orbit, k, w, N, icfg);

    ResponseCurve curve;
    curve.kind = CurveKind::IRC;
    curve.grid_n = N;
    curve.thetas.resize(N + 1);
    for (int j = 0; j <= N; ++j) curve.thetas[j] = kTwoPi * (double)j / (double)N;
    curve.values.assign(N + 1, State(n));
    curve.v = v;
    curve.normalization = opts.normalization;
    curve.k = k;

    if (opts.normalization == IrcNormalization::EigenvectorUnit) {
        const double proj = dot(p.raw[0], v);  // logscale[0] = 0
        if (std::abs(proj) < 1e-6 * norm(p.raw[0]))
            throw SolverError(
                "compute_irc: v nearly orthogonal to the periodic eigenvector; "
                "normalization ill-conditioned");
        const double lc = -std::log(std::abs(proj));
        const double sc = (proj > 0.0) ? 1.0 : -1.0;
        for (int j = 0; j <= N; ++j) {
            const double f = std::exp(p.logscale[j] + lc);
            for (int i = 0; i < n; ++i) curve.values[j][i] = sc * p.raw[j][i] * f;
        }
    } else {
        double lmax = -1e300;
        for (int j = 0; j <= N; ++j) {
            const double mag = sup_norm(p.raw[j]);
            if (mag > 0.0) lmax = std::max(lmax, p.logscale[j] + std::log(mag));
        }
        for (int j = 0; j <= N; ++j) {
            const double f = std::exp(p.logscale[j] - lmax);
            for (int i = 0; i < n; ++i) curve.values[j][i] = p.raw[j][i] * f;
        }
    }

    curve.curve_scale = curve_sup(curve.values);
    double cl = 0.0;
    for (int i = 0; i < n; ++i)
        cl = std::max(cl, std::abs(curve.values[N][i] - curve.values[0][i]));
    curve.closure_residual = cl;
    curve.method = AdjointMethod::PeriodMapEigen;
    return curve;
}

}  // namespace

ResponseCurve compute_irc(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          double k, const State& v, const IntegratorConfig& cfg,
                          const IrcOptions& opts) {
    try {
        return irc_period_map_eigen(field, orbit, k, v, cfg, opts);
    } catch (const SolverError&) {
        if (field.dimension != 2) throw;
        return planar_irc_quadrature(field, orbit, k, v, cfg, opts);
    }
}

double phase_shift_oracle(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          double theta, const State& delta, double k,
                          const IntegratorConfig& cfg) {
    const int n = field.dimension;
    const double T = orbit.period();
    const double omega = orbit.omega();
    const IntegratorConfig icfg = adjoint_cfg(cfg);
    const double horizon = std::max(20.0 / std::max(std::abs(k), 1e-12), 1.5 * T);

    const State x0 = orbit.anchor();
    State a = orbit.at_theta(theta);
    State b = a;
    for (int i = 0; i < n; ++i) b[i] += delta[i];

    // Each rising crossing advances the phase by exactly 2*pi, so the
    // asymptotic shift is 2*pi*(count_p - count_u) - omega*(t_p - t_u) for
    // the last crossings of each chain; the count term makes the result
    // immune to a perturbation moving the start across the section.
    auto crossings_until = [&](const State& start) {
        std::vector<double> times;
        State cur = start;
        double acc = 0.0;
        while (acc < horizon) {
            EventCrossing c = first_return(field, x0, cur, icfg, T);
            acc += c.time;
            if (acc >= horizon) break;
            times.push_back(acc);
            cur = c.state;
            if (times.size() > 4000)
                throw SolverError("phase_shift_oracle: crossing budget exhausted");
        }
        return std::make_pair(times, cur);
    };
    auto [tu, last_u] = crossings_until(a);
    auto [tp, last_p] = crossings_until(b);
    if (tu.empty() || tp.empty())
        throw SolverError("phase_shift_oracle: no section crossings in horizon");

    // Convergence back to the orbit: the final crossing must sit at the
    // anchor again.
    State d = last_p;
    for (int i = 0; i < n; ++i) d[i] -= x0[i];
    if (norm(d) > 1e-5 * std::max(1.0, orbit.state_scale()))
        throw SolverError("phase_shift_oracle: trajectory not converged to the orbit");

    double shift = kTwoPi * ((double)tp.size() - (double)tu.size()) -
                   omega * (tp.back() - tu.back());
    shift = std::remainder(shift, kTwoPi);  // representative in (-pi, pi]
    return shift;
}

double isostable_shift_oracle(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                              const FloquetData& floq, double theta, const State& delta,
                              const IntegratorConfig& cfg) {
    const int n = field.dimension;
    if (n != 2) throw SolverError("isostable_shift_oracle: planar systems only");
    // Below ~1e-7 the first-return displacement lambda*|delta| sits at the
    // double-precision position noise and the functional returns amplified
    // garbage, not a measurement.
    if (floq.monodromy_underflow || !(floq.lambda > 1e-7))
        throw OracleUnavailable(
            "isostable_shift_oracle: Floquet multiplier too small to resolve; "
            "oracle unavailable in this regime");
    const double T = orbit.period();
    const IntegratorConfig icfg = adjoint_cfg(cfg);
    const State& x0 = orbit.anchor();

    // Anchor isochron, approximated by its tangent line along v; crossings
    // are detected in the flow direction.
    State nrm = {-floq.v[1], floq.v[0]};
    const State f0 = field.eval(x0);
    if (dot(nrm, f0) < 0.0)
        for (double& vv : nrm) vv = -vv;

    auto psi_of = [&](const State& p) {
        EventCrossing c = first_section_crossing(field, x0, nrm, p, icfg, T);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += floq.v[i] * (c.state[i] - x0[i]);
        return s * std::exp(-floq.k * c.time);
    };

    State a = orbit.at_theta(theta);
    State b = a;
    for (int i = 0; i < n; ++i) b[i] += delta[i];
    return psi_of(b) - psi_of(a);
}

}  // namespace phasered
