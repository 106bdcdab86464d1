#pragma once

#include <span>
#include <vector>

#include "phasered/common.hpp"

namespace phasered {

/// Solve A x = b for a small dense n x n system (row-major A) by Gaussian
/// elimination with partial pivoting. A and b are modified in place; the
/// solution lands in b. Throws SolverError on a (numerically) singular A.
void solve_dense(std::vector<double>& a, std::vector<double>& b);

/// y = A x for row-major n x n A.
void matvec(std::span<const double> a, std::span<const double> x, std::span<double> y);

/// Real eigenvalues and eigenvectors of a 2x2 matrix [[a,b],[c,d]].
/// Returns false when the eigenvalues are complex.
struct Eigen2 {
    double lambda1 = 0.0, lambda2 = 0.0;
    double v1[2] = {0, 0}, v2[2] = {0, 0};
};
bool eigen2(double a, double b, double c, double d, Eigen2& out);

}  // namespace phasered
