#pragma once

#include "pmf/fdm.hpp"
#include "pmf/grid.hpp"

#include <span>
#include <vector>

namespace pmf {

/// Eigenvalues of the Toeplitz transition matrix: those of a single step and the
/// entrywise product accumulated over a prediction interval.
struct EigenSpec {
    std::vector<double> lambdas;
    std::vector<double> accumulated;
};

/// lambda_{j-1} = b + 2 a cos(j pi / (N + 1)), j = 1..N.
std::vector<double> fdiff_eigvals(const TridiagSpec& spec);

/// R(i-1, j-1) = sin(i j pi / (N + 1)); R^-1 = 2 / (N + 1) R.
Mat fdiff_eigvecs(int N);

/// 1D accumulated eigenvalues over l steps, the grid advanced before each step.
EigenSpec lambda_product(const CtModel& m, const MovingGrid& g, double t_k, int l, double dt);

/// Unnormalized DST-I; applying it twice multiplies by (N + 1) / 2.
std::vector<double> dst1(std::span<const double> v);

/// out = 2 / (N + 1) * dst1(accumulated .* dst1(weights)).
std::vector<double> fst_predict(std::span<const double> weights, const EigenSpec& spec);

/// Multidimensional prediction through the sine basis.  Reproduces fdm_predict with the
/// same l: the per-step eigenvalue tensor is 1 - dt trace(A) + sum_m 2 a_m (cos theta_m - 1).
PMD sine_predict(const PMD& p, const CtModel& m, double tau, int l);

}  // namespace pmf
