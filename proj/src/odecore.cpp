#include "phasered/odecore.hpp"

#include <algorithm>
#include <cmath>

namespace phasered {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output coefficients (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

template <typename Real, typename Rhs>
double initial_step(const Rhs& rhs, int n, double t0, const std::vector<Real>& y0,
                    const std::vector<Real>& f0, double t_span,
                    const IntegratorConfig& cfg) {
    double d0 = 0.0, d1n = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs((double)y0[i]);
        d0 += ((double)y0[i] / sc) * ((double)y0[i] / sc);
        d1n += ((double)f0[i] / sc) * ((double)f0[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1n = std::sqrt(d1n / n);
    double h0 = (d0 < 1e-10 || d1n < 1e-10) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t_span);

    std::vector<Real> y1(n), f1(n);
    for (int i = 0; i < n; ++i) y1[i] = y0[i] + (Real)h0 * f0[i];
    rhs((Real)(t0 + h0), y1, f1);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs((double)y0[i]);
        const double df = (double)(f1[i] - f0[i]) / sc;
        d2 += df * df;
    }
    d2 = std::sqrt(d2 / n) / h0;

    const double dm = std::max(d1n, d2);
    double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                              : std::pow(0.01 / dm, 0.2);
    double h = std::min({100.0 * h0, h1, t_span});
    if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
    return h;
}

template <typename Real, typename Rhs>
Trajectory integrate_adaptive(const Rhs& rhs, int n, const State& x0,
                              double t0, double t1, const IntegratorConfig& cfg) {
    Trajectory traj(StepMode::Adaptive, n);
    traj.push_initial(t0, x0);

    using RVec = std::vector<Real>;
    RVec y(x0.begin(), x0.end());
    std::vector<RVec> k(7, RVec(n));
    RVec ytmp(n), y1(n);
    rhs((Real)t0, y, k[0]);  // FSAL: k1 of the first step

    double t = t0;
    double h = initial_step<Real>(rhs, n, t0, y, k[0], t1 - t0, cfg);
    double facold = 1e-4;
    constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
    constexpr double fac1 = 0.2, fac2 = 10.0;
    double facmax = fac2;
    long nsteps = 0;

    State y1d(n);
    StepRecord rec;
    rec.stages.assign(7, State(n));

    while (t < t1) {
        if (++nsteps > cfg.max_steps)
            throw SolverError("integrate: step count exhausted");
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw SolverError("integrate: step size underflow");
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }
        const Real hr = (Real)h;

        auto stage = [&](int s, double cs, std::initializer_list<double> as) {
            for (int i = 0; i < n; ++i) {
                Real acc = y[i];
                int j = 0;
                for (double a : as) acc += hr * (Real)a * k[j++][i];
                ytmp[i] = acc;
            }
            rhs((Real)(t + cs * h), ytmp, k[s]);
        };
        stage(1, c2, {a21});
        stage(2, c3, {a31, a32});
        stage(3, c4, {a41, a42, a43});
        stage(4, c5, {a51, a52, a53, a54});
        stage(5, 1.0, {a61, a62, a63, a64, a65});
        for (int i = 0; i < n; ++i)
            y1[i] = y[i] + hr * ((Real)a71 * k[0][i] + (Real)a73 * k[2][i] +
                                 (Real)a74 * k[3][i] + (Real)a75 * k[4][i] +
                                 (Real)a76 * k[5][i]);
        rhs((Real)(t + h), y1, k[6]);

        double err = 0.0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite((double)y1[i]) || !std::isfinite((double)k[6][i]))
                finite = false;
            const double sc = cfg.abs_tol +
                              cfg.rel_tol * std::max(std::abs((double)y[i]),
                                                     std::abs((double)y1[i]));
            const double e = (double)(hr * ((Real)e1 * k[0][i] + (Real)e3 * k[2][i] +
                                            (Real)e4 * k[3][i] + (Real)e5 * k[4][i] +
                                            (Real)e6 * k[5][i] + (Real)e7 * k[6][i]));
            err += (e / sc) * (e / sc);
        }
        if (!finite) throw SolverError("integrate: nonfinite state encountered");
        err = std::sqrt(err / n);

        const double fac11 = std::pow(std::max(err, 1e-32), expo1);
        if (err <= 1.0) {
            // accept
            rec.t0 = t;
            rec.h = h;
            for (int s = 0; s < 7; ++s)
                for (int i = 0; i < n; ++i) rec.stages[s][i] = (double)k[s][i];
            for (int i = 0; i < n; ++i) y1d[i] = (double)y1[i];
            traj.push_step(rec, last ? t1 : t + h, y1d);
            rec.stages.assign(7, State(n));

            facold = std::max(err, 1e-4);
            t = last ? t1 : t + h;
            std::swap(y, y1);
            std::swap(k[0], k[6]);  // FSAL

            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / facmax, std::min(1.0 / fac1, fac / safe));
            h = h / fac;
            if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
            facmax = fac2;
        } else {
            // reject
            h = h / std::min(1.0 / fac1, fac11 / safe);
            facmax = 1.0;
        }
    }
    return traj;
}

Trajectory integrate_fixed(const TimeRhs& rhs, int n, const State& x0,
                           double t0, double t1, const IntegratorConfig& cfg) {
    Trajectory traj(StepMode::FixedStep, n);
    traj.push_initial(t0, x0);

    State y = x0, y1(n), ytmp(n);
    State f0(n), k2(n), k3(n), k4(n), f1(n);
    rhs(t0, y, f0);

    double t = t0;
    long nsteps = 0;
    while (t < t1) {
        if (++nsteps > cfg.max_steps)
            throw SolverError("integrate: step count exhausted");
        double h = std::min(cfg.step, t1 - t);
        const bool last = (t + h >= t1);

        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * h * f0[i];
        rhs(t + 0.5 * h, ytmp, k2);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, ytmp, k3);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * k3[i];
        rhs(t + h, ytmp, k4);
        for (int i = 0; i < n; ++i)
            y1[i] = y[i] + h / 6.0 * (f0[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!all_finite(y1))
            throw SolverError("integrate: nonfinite state encountered");
        rhs(t + h, y1, f1);

        StepRecord rec;
        rec.t0 = t;
        rec.h = h;
        rec.stages = {f0, f1};
        traj.push_step(std::move(rec), last ? t1 : t + h, y1);

        t = last ? t1 : t + h;
        y = y1;
        f0 = f1;
    }
    return traj;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (mode == StepMode::FixedStep) {
        if (!(step > 0.0)) throw ConfigError("integrator: step must be > 0");
    } else {
        if (!(rel_tol > 0.0)) throw ConfigError("integrator: rel_tol must be > 0");
        if (!(abs_tol >= 0.0)) throw ConfigError("integrator: abs_tol must be >= 0");
    }
    if (max_step < 0.0) throw ConfigError("integrator: max_step must be >= 0");
    if (max_steps <= 0) throw ConfigError("integrator: max_steps must be > 0");
}

void Trajectory::push_initial(double t, const State& y) {
    times_.push_back(t);
    states_.push_back(y);
}

void Trajectory::push_step(StepRecord rec, double t1, const State& y1) {
    steps_.push_back(std::move(rec));
    times_.push_back(t1);
    states_.push_back(y1);
}

std::size_t Trajectory::locate_step(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t idx = (it == times_.begin()) ? 0 : std::size_t(it - times_.begin()) - 1;
    return std::min(idx, steps_.size() - 1);
}

void Trajectory::eval(double t, std::span<double> out) const {
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(t_begin()), std::abs(t_end())));
    if (t < t_begin() - tol || t > t_end() + tol)
        throw SolverError("Trajectory::eval: time outside stored span");
    if (steps_.empty()) {
        std::copy(states_.front().begin(), states_.front().end(), out.begin());
        return;
    }
    const std::size_t s = locate_step(std::clamp(t, t_begin(), t_end()));
    const StepRecord& rec = steps_[s];
    const State& y0 = states_[s];
    const State& y1 = states_[s + 1];
    const double th = std::clamp((t - rec.t0) / rec.h, 0.0, 1.0);
    const double th1 = 1.0 - th;

    if (mode_ == StepMode::Adaptive) {
        const auto& k = rec.stages;
        for (int i = 0; i < dim_; ++i) {
            const double ydiff = y1[i] - y0[i];
            const double bspl = rec.h * k[0][i] - ydiff;
            const double c4i = ydiff - rec.h * k[6][i] - bspl;
            const double c5i = rec.h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                                        d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
            out[i] = y0[i] + th * (ydiff + th1 * (bspl + th * (c4i + th1 * c5i)));
        }
    } else {
        const State& f0 = rec.stages[0];
        const State& f1 = rec.stages[1];
        const double h00 = (1.0 + 2.0 * th) * th1 * th1;
        const double h10 = th * th1 * th1;
        const double h01 = th * th * (3.0 - 2.0 * th);
        const double h11 = th * th * (th - 1.0);
        for (int i = 0; i < dim_; ++i)
            out[i] = h00 * y0[i] + rec.h * h10 * f0[i] + h01 * y1[i] + rec.h * h11 * f1[i];
    }
}

State Trajectory::eval(double t) const {
    State out(dim_);
    eval(t, out);
    return out;
}

Trajectory integrate_rhs(const TimeRhs& rhs, int dim, const State& x0,
                         double t0, double t1, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) throw SolverError("integrate: empty or reversed time span");
    if ((int)x0.size() != dim) throw SolverError("integrate: state dimension mismatch");
    auto call = [&rhs](double t, const std::vector<double>& y, std::vector<double>& f) {
        rhs(t, y, f);
    };
    return cfg.mode == StepMode::Adaptive
               ? integrate_adaptive<double>(call, dim, x0, t0, t1, cfg)
               : integrate_fixed(rhs, dim, x0, t0, t1, cfg);
}

Trajectory integrate(const VectorFieldSpec& field, const State& x0,
                     double t0, double t1, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) throw SolverError("integrate: empty or reversed time span");
    if ((int)x0.size() != field.dimension)
        throw SolverError("integrate: state dimension mismatch");
    if (cfg.mode == StepMode::FixedStep) {
        TimeRhs rhs = [&field](double, std::span<const double> x, std::span<double> out) {
            field.rhs(x, out);
        };
        return integrate_fixed(rhs, field.dimension, x0, t0, t1, cfg);
    }
    if (cfg.extended) {
        using LVec = std::vector<long double>;
        if (field.rhs_ld) {
            auto call = [&field](long double, const LVec& y, LVec& f) {
                field.rhs_ld(y, f);
            };
            return integrate_adaptive<long double>(call, field.dimension, x0, t0, t1, cfg);
        }
        // Extended accumulation around a double-precision rhs: still cuts
        // the summation roundoff.
        const int n = field.dimension;
        auto call = [&field, n](long double, const LVec& y, LVec& f) {
            State yd(n), fd(n);
            for (int i = 0; i < n; ++i) yd[i] = (double)y[i];
            field.rhs(yd, fd);
            for (int i = 0; i < n; ++i) f[i] = fd[i];
        };
        return integrate_adaptive<long double>(call, field.dimension, x0, t0, t1, cfg);
    }
    auto call = [&field](double, const std::vector<double>& y, std::vector<double>& f) {
        field.rhs(y, f);
    };
    return integrate_adaptive<double>(call, field.dimension, x0, t0, t1, cfg);
}

namespace {

bool direction_ok(double e0, double e1, CrossingDirection dir) {
    switch (dir) {
        case CrossingDirection::Rising: return e0 < 0.0 && e1 >= 0.0;
        case CrossingDirection::Falling: return e0 > 0.0 && e1 <= 0.0;
        default: return (e0 < 0.0 && e1 >= 0.0) || (e0 > 0.0 && e1 <= 0.0);
    }
}

EventCrossing refine_crossing(const Trajectory& traj,
                              const std::function<double(std::span<const double>)>& event,
                              double ta, double ea, double tb, double eb) {
    State x(traj.dimension());
    // Bisection interleaved with secant proposals on the dense output.
    for (int it = 0; it < 200; ++it) {
        double tm = 0.5 * (ta + tb);
        if (it % 2 == 1 && eb != ea) {
            const double ts = (ea * tb - eb * ta) / (ea - eb);
            const double lo = ta + 0.05 * (tb - ta), hi = tb - 0.05 * (tb - ta);
            if (ts > std::min(lo, hi) && ts < std::max(lo, hi)) tm = ts;
        }
        traj.eval(tm, x);
        const double em = event(x);
        const double scale = std::max(1.0, sup_norm(x));
        if (std::abs(em) < 1e-13 * scale || std::abs(tb - ta) < 1e-15 * std::max(1.0, std::abs(tm))) {
            return {tm, x};
        }
        if ((em < 0.0) == (ea < 0.0)) {
            ta = tm;
            ea = em;
        } else {
            tb = tm;
            eb = em;
        }
    }
    traj.eval(0.5 * (ta + tb), x);
    return {0.5 * (ta + tb), x};
}

}  // namespace

std::vector<EventCrossing> locate_all_events(
    const Trajectory& traj,
    const std::function<double(std::span<const double>)>& event,
    CrossingDirection dir) {
    std::vector<EventCrossing> found;
    if (traj.size() < 2) return found;
    double e0 = event(traj.state(0));
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double e1 = event(traj.state(i + 1));
        if (e0 != 0.0 && direction_ok(e0, e1, dir)) {
            found.push_back(refine_crossing(traj, event, traj.time(i), e0,
                                            traj.time(i + 1), e1));
        }
        e0 = e1;
    }
    return found;
}

EventCrossing locate_event(const Trajectory& traj,
                           const std::function<double(std::span<const double>)>& event,
                           CrossingDirection dir) {
    if (traj.size() >= 2) {
        double e0 = event(traj.state(0));
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            const double e1 = event(traj.state(i + 1));
            if (e0 != 0.0 && direction_ok(e0, e1, dir))
                return refine_crossing(traj, event, traj.time(i), e0, traj.time(i + 1), e1);
            e0 = e1;
        }
    }
    throw SolverError("locate_event: no sign change found");
}

std::vector<double> jacobian_fd(const VectorFieldSpec& field, const State& x) {
    const int n = field.dimension;
    std::vector<double> jac(n * n);
    State xp = x, xm = x, fp(n), fm(n);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        field.rhs(xp, fp);
        field.rhs(xm, fm);
        for (int i = 0; i < n; ++i) jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    if (!all_finite(jac)) throw SolverError("jacobian_fd: nonfinite entries");
    return jac;
}

std::vector<double> jacobian_at(const VectorFieldSpec& field, std::span<const double> x) {
    if (field.jacobian) {
        std::vector<double> jac(field.dimension * field.dimension);
        field.jacobian(x, jac);
        return jac;
    }
    return jacobian_fd(field, State(x.begin(), x.end()));
}

double divergence_at(const VectorFieldSpec& field, std::span<const double> x) {
    if (field.divergence) return field.divergence(x);
    const auto jac = jacobian_at(field, x);
    const int n = field.dimension;
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += jac[i * n + i];
    return tr;
}

}  // namespace phasered
