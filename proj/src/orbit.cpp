#include "phasered/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "phasered/linalg.hpp"

namespace phasered {

namespace {

struct Section {
    State point;
    State normal;  // unit
    double offset(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < point.size(); ++i) s += normal[i] * (x[i] - point[i]);
        return s;
    }
};

Section section_through(const VectorFieldSpec& field, const State& p) {
    State f = field.eval(p);
    const double fn = norm(f);
    if (!(fn > 0.0))
        throw SolverError("find_periodic_orbit: vector field vanishes at the section point");
    for (double& v : f) v /= fn;
    return {p, std::move(f)};
}

/// Integrate forward from x0 until the next rising crossing of the section,
/// extending the horizon in chunks. A crossing only counts once the offset
/// has genuinely been below the section (beyond a small gate), so starting
/// exactly on the section does not register an immediate return.
EventCrossing next_return(const VectorFieldSpec& field, const Section& sec,
                          const State& x0, const IntegratorConfig& cfg,
                          double chunk_hint, double min_time = 0.0,
                          double max_time = 1e7) {
    auto event = [&sec](std::span<const double> x) { return sec.offset(x); };
    const double gate = 1e-9 * std::max(1.0, sup_norm(x0));
    bool armed = event(x0) < -gate;

    State x = x0;
    double t_base = 0.0;
    double chunk = chunk_hint;
    State probe(x0.size());
    while (t_base < max_time) {
        Trajectory traj = integrate(field, x, 0.0, chunk, cfg);
        double e0 = event(traj.state(0));
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            const double e1 = event(traj.state(i + 1));
            if (armed && e0 < 0.0 && e1 >= 0.0 && t_base + traj.time(i + 1) >= min_time) {
                // bisection on the dense output
                double ta = traj.time(i), tb = traj.time(i + 1);
                double ea = e0;
                for (int it = 0; it < 120; ++it) {
                    const double tm = 0.5 * (ta + tb);
                    traj.eval(tm, probe);
                    const double em = event(probe);
                    if (std::abs(em) < 1e-13 * std::max(1.0, sup_norm(probe)) ||
                        tb - ta < 1e-15 * std::max(1.0, std::abs(tm)))
                        return {t_base + tm, probe};
                    if ((em < 0.0) == (ea < 0.0)) {
                        ta = tm;
                        ea = em;
                    } else {
                        tb = tm;
                    }
                }
                traj.eval(0.5 * (ta + tb), probe);
                return {t_base + 0.5 * (ta + tb), probe};
            }
            if (!armed && e1 < -gate) armed = true;
            e0 = e1;
        }
        t_base += traj.t_end();
        x = traj.back();
        chunk = std::min(chunk * 2.0, 1e5);
    }
    throw SolverError("find_periodic_orbit: no returns detected (not oscillating?)");
}

}  // namespace

PeriodicOrbit::PeriodicOrbit(Trajectory cycle, double period, int n_samples)
    : cycle_(std::move(cycle)), period_(period), omega_(kTwoPi / period) {
    State diff = cycle_.back();
    const State& a = cycle_.state(0);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= a[i];
    closure_ = norm(diff);
    scale_ = 0.0;
    samples_.resize(n_samples);
    for (int j = 0; j < n_samples; ++j) {
        const double t = period_ * (double)j / (double)n_samples;
        samples_[j] = cycle_.eval(t);
        scale_ = std::max(scale_, sup_norm(samples_[j]));
    }
    if (scale_ <= 0.0) scale_ = 1.0;
}

State PeriodicOrbit::at_time(double t) const {
    double tw = std::fmod(t, period_);
    if (tw < 0.0) tw += period_;
    return cycle_.eval(tw);
}

State PeriodicOrbit::at_theta(double theta) const {
    return at_time(wrap_angle(theta) / omega_);
}

PeriodicOrbit find_periodic_orbit(const VectorFieldSpec& field, const State& guess,
                                  const IntegratorConfig& cfg, const OrbitOptions& opts) {
    cfg.validate();
    const int n = field.dimension;
    if ((int)guess.size() != n)
        throw SolverError("find_periodic_orbit: guess dimension mismatch");

    // Relax: iterate returns to the section through the guess until two
    // successive returns coincide.
    Section sec = section_through(field, guess);
    State x = guess;
    double chunk = 1.0;
    std::optional<State> prev;
    double t_return = 0.0;
    for (int i = 0; i < opts.relax_returns; ++i) {
        EventCrossing c = next_return(field, sec, x, cfg, chunk);
        t_return = c.time;
        chunk = 1.5 * c.time;
        x = c.state;
        if (prev) {
            State d = x;
            for (int k = 0; k < n; ++k) d[k] -= (*prev)[k];
            if (norm(d) < 1e-10 * std::max(1.0, sup_norm(x))) break;
        }
        prev = x;
    }

    // Orthogonal section through the relaxed point.
    sec = section_through(field, x);

    // Return multiplicity guard: the period map is the j-th rising crossing,
    // where j is the first crossing that lands back near the base point.
    int multiplicity = 1;
    {
        State scan = x;
        double tacc = 0.0;
        for (int j = 1; j <= 6; ++j) {
            EventCrossing c = next_return(field, sec, scan, cfg, chunk);
            tacc += c.time;
            scan = c.state;
            State d = scan;
            for (int k = 0; k < n; ++k) d[k] -= x[k];
            if (norm(d) < 0.05 * std::max(1.0, sup_norm(x))) {
                multiplicity = j;
                t_return = tacc;
                break;
            }
            if (j == 6)
                throw SolverError("find_periodic_orbit: section returns do not cluster");
        }
    }

    auto period_map = [&](const State& from) -> EventCrossing {
        EventCrossing c{0.0, from};
        double tacc = 0.0;
        for (int j = 0; j < multiplicity; ++j) {
            c = next_return(field, sec, c.state, cfg, chunk);
            tacc += c.time;
        }
        c.time = tacc;
        return c;
    };

    // In-plane orthonormal basis (n-1 directions orthogonal to the normal).
    std::vector<State> basis;
    if (n == 2) {
        basis.push_back({-sec.normal[1], sec.normal[0]});
    } else {
        for (int k = 0; k < n && (int)basis.size() < n - 1; ++k) {
            State b(n, 0.0);
            b[k] = 1.0;
            const double pn = dot(b, sec.normal);
            for (int i = 0; i < n; ++i) b[i] -= pn * sec.normal[i];
            for (const State& q : basis) {
                const double pq = dot(b, q);
                for (int i = 0; i < n; ++i) b[i] -= pq * q[i];
            }
            const double bn = norm(b);
            if (bn > 1e-8) {
                for (double& v : b) v /= bn;
                basis.push_back(std::move(b));
            }
        }
    }
    const int m = (int)basis.size();

    // Newton on the (n-1)-dimensional return map around the relaxed point.
    const double scale = std::max(1.0, sup_norm(x));
    State anchor = x;
    double period = t_return;
    bool converged = false;
    for (int it = 0; it < opts.newton_max_iters; ++it) {
        EventCrossing ret = period_map(anchor);
        period = ret.time;
        State resid(n);
        for (int k = 0; k < n; ++k) resid[k] = ret.state[k] - anchor[k];
        if (norm(resid) < opts.closure_tol * scale) {
            converged = true;
            break;
        }
        // g(xi) = coords of (P(x)-x) in the in-plane basis
        std::vector<double> g(m);
        for (int i = 0; i < m; ++i) g[i] = dot(resid, basis[i]);

        std::vector<double> jac(m * m);
        const double h = 1e-7 * scale;
        for (int j = 0; j < m; ++j) {
            State xp = anchor;
            for (int k = 0; k < n; ++k) xp[k] += h * basis[j][k];
            EventCrossing rp = period_map(xp);
            for (int i = 0; i < m; ++i) {
                double gi = 0.0;
                for (int k = 0; k < n; ++k)
                    gi += (rp.state[k] - xp[k]) * basis[i][k];
                jac[i * m + j] = (gi - g[i]) / h;
            }
        }
        std::vector<double> step = g;
        for (double& v : step) v = -v;
        solve_dense(jac, step);
        double step_norm = 0.0;
        for (double v : step) step_norm += v * v;
        step_norm = std::sqrt(step_norm);
        const double cap = 0.1 * scale;
        const double sc = (step_norm > cap) ? cap / step_norm : 1.0;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < n; ++k) anchor[k] += sc * step[j] * basis[j][k];
    }
    if (!converged)
        throw SolverError("find_periodic_orbit: Newton stagnation on the return map");

    Trajectory cycle = integrate(field, anchor, 0.0, period, cfg);
    PeriodicOrbit orbit(std::move(cycle), period, opts.n_samples);
    if (orbit.closure_residual() > 10.0 * opts.closure_tol * scale)
        throw SolverError("find_periodic_orbit: closure residual above tolerance");
    return orbit;
}

PeriodicOrbit set_phase_anchor(
    const VectorFieldSpec& field, const PeriodicOrbit& orbit,
    const std::function<double(std::span<const double>)>& anchor_event,
    const IntegratorConfig& cfg, CrossingDirection dir,
    const std::function<bool(std::span<const double>)>& accept, int n_samples) {
    auto crossings = locate_all_events(orbit.cycle(), anchor_event, dir);
    const EventCrossing* chosen = nullptr;
    for (const auto& c : crossings) {
        if (!accept || accept(c.state)) {
            chosen = &c;
            break;
        }
    }
    if (!chosen) throw SolverError("set_phase_anchor: no matching crossing on the orbit");
    const int ns = n_samples > 0 ? n_samples : (int)orbit.sample_count();
    Trajectory cycle = integrate(field, chosen->state, 0.0, orbit.period(), cfg);
    return PeriodicOrbit(std::move(cycle), orbit.period(), ns);
}

EventCrossing first_return(const VectorFieldSpec& field, const State& base,
                           const State& from, const IntegratorConfig& cfg,
                           double period_hint, double min_time, double max_time) {
    Section sec = section_through(field, base);
    return next_return(field, sec, from, cfg, std::max(period_hint, 1e-6), min_time,
                       max_time);
}

EventCrossing first_section_crossing(const VectorFieldSpec& field, const State& base,
                                     const State& normal, const State& from,
                                     const IntegratorConfig& cfg, double period_hint,
                                     double min_time, double max_time) {
    Section sec{base, normal};
    const double nn = norm(sec.normal);
    if (!(nn > 0.0)) throw SolverError("first_section_crossing: zero normal");
    for (double& v : sec.normal) v /= nn;
    return next_return(field, sec, from, cfg, std::max(period_hint, 1e-6), min_time,
                       max_time);
}

std::vector<std::pair<double, State>> sample_orbit(const PeriodicOrbit& orbit, int n) {
    if (n < 4) throw SolverError("sample_orbit: need at least 4 samples");
    std::vector<std::pair<double, State>> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        const double theta = kTwoPi * (double)j / (double)n;
        out.emplace_back(theta, orbit.at_theta(theta));
    }
    return out;
}

}  // namespace phasered
