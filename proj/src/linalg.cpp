#include "phasered/linalg.hpp"

#include <cmath>

namespace phasered {

void solve_dense(std::vector<double>& a, std::vector<double>& b) {
    const int n = (int)b.size();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300)
            throw SolverError("solve_dense: singular matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
        b[r] = s / a[r * n + r];
    }
}

void matvec(std::span<const double> a, std::span<const double> x, std::span<double> y) {
    const int n = (int)x.size();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += a[i * n + j] * x[j];
        y[i] = s;
    }
}

bool eigen2(double a, double b, double c, double d, Eigen2& out) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = 0.25 * tr * tr - det;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    // Avoid cancellation: compute the larger-magnitude root first.
    const double l1 = 0.5 * tr + (tr >= 0.0 ? sq : -sq);
    const double l2 = (std::abs(l1) > 1e-300) ? det / l1 : 0.5 * tr - (tr >= 0.0 ? sq : -sq);
    out.lambda1 = l1;
    out.lambda2 = l2;
    auto fill_vec = [&](double lam, double* v) {
        // Rows of (A - lam I) are both orthogonal to the eigenvector; use
        // the larger one.
        const double r1[2] = {a - lam, b};
        const double r2[2] = {c, d - lam};
        const double n1 = std::hypot(r1[0], r1[1]);
        const double n2 = std::hypot(r2[0], r2[1]);
        double vx, vy;
        if (n1 >= n2 && n1 > 0.0) {
            vx = -r1[1];
            vy = r1[0];
        } else if (n2 > 0.0) {
            vx = -r2[1];
            vy = r2[0];
        } else {  // A is lam * I
            vx = 1.0;
            vy = 0.0;
        }
        const double nn = std::hypot(vx, vy);
        v[0] = vx / nn;
        v[1] = vy / nn;
    };
    fill_vec(l1, out.v1);
    fill_vec(l2, out.v2);
    return true;
}

}  // namespace phasered
