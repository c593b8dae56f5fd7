#pragma once

#include "pmf/grid.hpp"
#include "pmf/model.hpp"

namespace pmf {

/// Coefficients of the explicit central-difference transition matrix along one axis:
/// a on the off-diagonals, b on the diagonal.
struct TridiagSpec {
    double a = 0.0;
    double b = 1.0;
    int N = 1;

    [[nodiscard]] bool stable() const { return b >= 0.0; }
};

/// a = q dt / (2 delta^2), b = 1 - q dt / delta^2 - dt trace(A).
TridiagSpec make_tridiag_spec(double q, double dt, double delta, double trace_a, int N);

/// One explicit step on a grid that has already been advanced for this step.
/// Zero (Dirichlet) ghost cells at the boundary.
PMD fdm_step(const PMD& p, const CtModel& m, double dt);

/// Largest dt that keeps every stencil weight nonnegative on grid g.
double fdm_max_stable_dt(const CtModel& m, const MovingGrid& g);

/// Smallest step count such that each step stays within half of the stability bound
/// over the whole interval tau.
int fdm_default_substeps(const CtModel& m, const MovingGrid& g, double tau);

Mat build_fdiff(const TridiagSpec& spec);

/// Dense product F_diff(l) ... F_diff(1) of the 1D explicit scheme, with the grid
/// advanced before every step.  t_k only labels the interval (the model is time invariant).
Mat tpm_product(const CtModel& m, const MovingGrid& g, double t_k, int l, double dt);

/// l alternations of grid advance and explicit step over tau, normalized.
PMD fdm_predict(const PMD& p, const CtModel& m, double tau, int l);

}  // namespace pmf
