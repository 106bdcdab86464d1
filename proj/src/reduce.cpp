#include "phasered/reduce.hpp"

#include <algorithm>
#include <cmath>

#include "phasered/spline.hpp"

namespace phasered {

ControlSignal ControlSignal::zero(int dim) {
    ControlSignal s;
    s.kind_ = Kind::Zero;
    s.dim_ = dim;
    return s;
}

ControlSignal ControlSignal::piecewise_constant(std::vector<double> times,
                                                std::vector<State> values) {
    if (times.size() != values.size())
        throw ConfigError("control signal: times/values size mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ConfigError("control signal: times must be strictly increasing");
    ControlSignal s;
    s.kind_ = values.empty() ? Kind::Zero : Kind::PiecewiseConstant;
    s.dim_ = values.empty() ? 0 : (int)values.front().size();
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
}

ControlSignal ControlSignal::impulses(std::vector<double> times, std::vector<State> kicks) {
    if (times.size() != kicks.size())
        throw ConfigError("control signal: times/kicks size mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ConfigError("control signal: impulse times must be strictly increasing");
    ControlSignal s;
    s.kind_ = kicks.empty() ? Kind::Zero : Kind::Impulses;
    s.dim_ = kicks.empty() ? 0 : (int)kicks.front().size();
    s.times_ = std::move(times);
    s.values_ = std::move(kicks);
    return s;
}

State ControlSignal::eval(double t) const {
    if (kind_ != Kind::PiecewiseConstant || times_.empty()) return State(dim_, 0.0);
    if (t < times_.front()) return State(dim_, 0.0);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t idx = (std::size_t)(it - times_.begin()) - 1;
    return values_[idx];
}

namespace {

void append_reduced(ReducedTrajectory& out, const Trajectory& seg, bool skip_first) {
    for (std::size_t i = skip_first ? 1 : 0; i < seg.size(); ++i) {
        out.times.push_back(seg.time(i));
        out.theta_unwrapped.push_back(seg.state(i)[0]);
        out.psi.push_back(seg.state(i)[1]);
    }
}

}  // namespace

ReducedTrajectory simulate_reduced(const ResponseCurve& Z, const ResponseCurve& I,
                                   double k, double omega, const ControlSignal& u,
                                   ReducedState init, double t0, double t1,
                                   const IntegratorConfig& cfg) {
    if (Z.grid_n != I.grid_n)
        throw SolverError("simulate_reduced: Z and I must share a theta grid");
    const int n = (int)Z.values.front().size();

    std::vector<PeriodicCubicSpline> zs(n), is(n);
    for (int c = 0; c < n; ++c) {
        std::vector<double> zv(Z.grid_n), iv(I.grid_n);
        for (int j = 0; j < Z.grid_n; ++j) zv[j] = Z.values[j][c];
        for (int j = 0; j < I.grid_n; ++j) iv[j] = I.values[j][c];
        zs[c] = PeriodicCubicSpline(std::move(zv));
        is[c] = PeriodicCubicSpline(std::move(iv));
    }
    auto z_dot = [&](double theta, const State& vec) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += zs[c].eval(theta) * vec[c];
        return s;
    };
    auto i_dot = [&](double theta, const State& vec) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += is[c].eval(theta) * vec[c];
        return s;
    };

    TimeRhs rhs = [&](double t, std::span<const double> y, std::span<double> out) {
        const State uv = u.eval(t);
        out[0] = omega + z_dot(y[0], uv);
        out[1] = k * y[1] + i_dot(y[0], uv);
        if (!std::isfinite(y[1]))
            throw SolverError("simulate_reduced: nonfinite psi (input too large)");
    };

    // segment breakpoints at every input discontinuity
    std::vector<double> cuts;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u.time(i) >= t0 && u.time(i) < t1) cuts.push_back(u.time(i));
    cuts.push_back(t1);

    ReducedTrajectory out;
    State y = {init.theta, init.psi};
    double t = t0;
    out.times.push_back(t);
    out.theta_unwrapped.push_back(y[0]);
    out.psi.push_back(y[1]);
    std::size_t imp = 0;
    while (imp < u.size() && u.time(imp) < t0) ++imp;
    for (double tc : cuts) {
        if (tc > t) {
            Trajectory seg = integrate_rhs(rhs, 2, y, t, tc, cfg);
            append_reduced(out, seg, true);
            y = seg.back();
            t = tc;
        }
        if (u.kind() == ControlSignal::Kind::Impulses && imp < u.size() &&
            std::abs(u.time(imp) - tc) <= 1e-12 * std::max(1.0, std::abs(tc))) {
            const State& delta = u.value(imp);
            const double theta_pre = y[0];  // both jumps use the pre-kick phase
            y[0] += z_dot(theta_pre, delta);
            y[1] += i_dot(theta_pre, delta);
            // jump recorded as a same-time sample
            out.times.push_back(t);
            out.theta_unwrapped.push_back(y[0]);
            out.psi.push_back(y[1]);
            ++imp;
        }
        if (!std::isfinite(y[1]))
            throw SolverError("simulate_reduced: nonfinite psi (input too large)");
    }
    return out;
}

State PiecewiseTrajectory::eval(double t) const {
    for (const auto& seg : segments) {
        if (t <= seg.t_end() || &seg == &segments.back()) {
            if (t >= seg.t_begin() || &seg == &segments.front())
                return seg.eval(std::clamp(t, seg.t_begin(), seg.t_end()));
        }
    }
    return segments.back().back();
}

PiecewiseTrajectory simulate_full_perturbed(const VectorFieldSpec& field,
                                            const ControlSignal& u, const State& x0,
                                            double t0, double t1,
                                            const IntegratorConfig& cfg) {
    PiecewiseTrajectory out;
    if (u.kind() == ControlSignal::Kind::Zero) {
        out.segments.push_back(integrate(field, x0, t0, t1, cfg));
        return out;
    }
    const int n = field.dimension;
    if (u.dimension() != n)
        throw ConfigError("simulate_full_perturbed: input dimension mismatch");

    std::vector<double> cuts;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u.time(i) >= t0 && u.time(i) < t1) cuts.push_back(u.time(i));
    cuts.push_back(t1);

    TimeRhs rhs = [&field, &u, n](double t, std::span<const double> x,
                                  std::span<double> out_dx) {
        field.rhs(x, out_dx);
        if (u.kind() == ControlSignal::Kind::PiecewiseConstant) {
            const State uv = u.eval(t);
            for (int i = 0; i < n; ++i) out_dx[i] += uv[i];
        }
    };

    State x = x0;
    double t = t0;
    std::size_t imp = 0;
    while (imp < u.size() && u.time(imp) < t0) ++imp;
    for (double tc : cuts) {
        if (tc > t) {
            out.segments.push_back(integrate_rhs(rhs, n, x, t, tc, cfg));
            x = out.segments.back().back();
            t = tc;
        }
        if (u.kind() == ControlSignal::Kind::Impulses && imp < u.size() &&
            std::abs(u.time(imp) - tc) <= 1e-12 * std::max(1.0, std::abs(tc))) {
            for (int i = 0; i < n; ++i) x[i] += u.value(imp)[i];
            ++imp;
        }
    }
    if (out.segments.empty()) out.segments.push_back(integrate(field, x0, t0, t1, cfg));
    return out;
}

ReductionErrorReport compare_reductions(const VectorFieldSpec& field,
                                        const PeriodicOrbit& orbit,
                                        const ResponseCurve& Z, const ResponseCurve& I,
                                        const FloquetData& floq, const ControlSignal& u,
                                        const std::vector<double>& magnitudes,
                                        const IntegratorConfig& cfg) {
    if (u.kind() != ControlSignal::Kind::Impulses || u.size() != 1)
        throw ConfigError("compare_reductions: expects a single-impulse signal");
    const double t_imp = u.time(0);
    const State& base = u.value(0);
    const double base_norm = norm(base);
    if (!(base_norm > 0.0)) throw ConfigError("compare_reductions: zero impulse");
    const double theta_imp = wrap_angle(orbit.omega() * t_imp);

    ReductionErrorReport rep;
    std::vector<double> logm, logE;
    for (double mag : magnitudes) {
        ReductionErrorRow row;
        row.magnitude = mag;
        State delta(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            delta[i] = base[i] * (mag / base_norm);

        row.dtheta_reduced = dot(Z.at(theta_imp), delta);
        row.dpsi_reduced = dot(I.at(theta_imp), delta);
        row.dtheta_measured =
            phase_shift_oracle(field, orbit, theta_imp, delta, floq.k, cfg);
        try {
            row.dpsi_measured =
                isostable_shift_oracle(field, orbit, floq, theta_imp, delta, cfg);
        } catch (const OracleUnavailable&) {
            row.psi_available = false;
        }

        const double eth = std::abs(row.dtheta_reduced - row.dtheta_measured);
        rep.max_theta_error = std::max(rep.max_theta_error, eth);
        if (row.psi_available)
            rep.max_psi_error = std::max(
                rep.max_psi_error, std::abs(row.dpsi_reduced - row.dpsi_measured));
        if (eth > 0.0) {
            logm.push_back(std::log(mag));
            logE.push_back(std::log(eth));
        }
        rep.rows.push_back(row);
    }
    if (logm.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = (double)logm.size();
        for (std::size_t i = 0; i < logm.size(); ++i) {
            sx += logm[i];
            sy += logE[i];
            sxx += logm[i] * logm[i];
            sxy += logm[i] * logE[i];
        }
        rep.theta_error_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return rep;
}

}  // namespace phasered
