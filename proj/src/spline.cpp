#include "phasered/spline.hpp"

#include <cmath>

namespace phasered {

namespace {

// Cyclic tridiagonal solve (Thomas + Sherman-Morrison correction) for the
// system with constant bands (a, b, a) and wrap-around corners a.
std::vector<double> solve_cyclic(double a, double b, std::vector<double> r) {
    const int n = (int)r.size();
    auto tri = [&](std::vector<double> rhs, double b0, double bn) {
        std::vector<double> c(n, 0.0), x(n, 0.0);
        double beta = b0;
        x[0] = rhs[0] / beta;
        for (int i = 1; i < n; ++i) {
            c[i] = a / beta;
            beta = ((i == n - 1) ? bn : b) - a * c[i];
            x[i] = (rhs[i] - a * x[i - 1]) / beta;
        }
        for (int i = n - 2; i >= 0; --i) x[i] -= c[i + 1] * x[i + 1];
        return x;
    };
    const double gamma = -b;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = a;
    std::vector<double> x = tri(std::move(r), b - gamma, b - a * a / gamma);
    std::vector<double> z = tri(std::move(u), b - gamma, b - a * a / gamma);
    const double fact = (x[0] + a * x[n - 1] / gamma) /
                        (1.0 + z[0] + a * z[n - 1] / gamma);
    for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

}  // namespace

PeriodicCubicSpline::PeriodicCubicSpline(std::vector<double> values)
    : y_(std::move(values)) {
    const int n = (int)y_.size();
    if (n < 3) throw SolverError("PeriodicCubicSpline: need at least 3 samples");
    h_ = kTwoPi / n;
    // (h/6) (M_{j-1} + 4 M_j + M_{j+1}) = (y_{j+1} - 2 y_j + y_{j-1})/h
    std::vector<double> rhs(n);
    for (int j = 0; j < n; ++j) {
        const double ym = y_[(j + n - 1) % n], yp = y_[(j + 1) % n];
        rhs[j] = 6.0 * (yp - 2.0 * y_[j] + ym) / (h_ * h_);
    }
    m_ = solve_cyclic(1.0, 4.0, std::move(rhs));
}

double PeriodicCubicSpline::eval(double theta) const {
    const int n = (int)y_.size();
    const double th = wrap_angle(theta);
    int j = (int)(th / h_);
    if (j >= n) j = n - 1;
    const int jp = (j + 1) % n;
    const double t = (th - j * h_) / h_;
    const double a = 1.0 - t;
    // standard cubic form with second derivatives m
    return a * y_[j] + t * y_[jp] +
           ((a * a * a - a) * m_[j] + (t * t * t - t) * m_[jp]) * (h_ * h_) / 6.0;
}

}  // namespace phasered
