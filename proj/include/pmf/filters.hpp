#pragma once

#include "pmf/grid.hpp"
#include "pmf/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pmf {

struct FilterOutput {
    Vec mean;
    Mat cov;
    /// log p(z_k | z_{0:k-1}); zero for the prior entry.
    double log_likelihood = 0.0;
    /// Wall time of the time update of this epoch.
    double seconds = 0.0;
};

struct GaussianPrior {
    Vec mean;
    Mat cov;
};

enum class Solver { Fdm, Sine, Spectral };

Solver parse_solver(const std::string& name);
std::string to_string(Solver s);

struct PmfConfig {
    int n_pa = 64;
    /// Grid half-width in standard deviations.
    double k_sigma = 4.0;
    /// Time between measurements.
    double Ts = 1.0;
    /// Substeps of the spectral solver; the explicit solvers use the stability rule
    /// unless fixed_substeps is set.
    int spectral_substeps = 10;
    int fixed_substeps = 0;
};

struct BayesUpdate {
    PMD posterior;
    /// Normalization constant p(z | past), the integral of prior times likelihood.
    double likelihood = 0.0;
};

/// Multiplies by the measurement density at the physical grid points and renormalizes.
BayesUpdate measurement_update(const PMD& p, const MeasModel& mm, double z);

/// Time update over tau with the chosen solver.
PMD time_update(const PMD& p, const CtModel& m, Solver solver, double tau, const PmfConfig& cfg);

/// Axis-aligned grid that holds the filtering density and its spread over the next interval.
MovingGrid design_grid(const Moments& filtering, const CtModel& m, const PmfConfig& cfg);
/// Same, with the spacing of the previous grid as a lower bound on the per-axis spread.
MovingGrid design_grid(const Moments& filtering, const CtModel& m, const PmfConfig& cfg,
                       const MovingGrid& previous);

/// Point-mass filter.  Entry 0 holds the prior moments; entry k + 1 the filtering moments
/// after zs[k].  The first measurement updates the prior directly, every later one is
/// preceded by a time update over Ts.
std::vector<FilterOutput> pmf_run(const CtModel& m, const MeasModel& mm, const std::vector<double>& zs,
                                  Solver solver, const PmfConfig& cfg, const GaussianPrior& prior);

/// Bootstrap particle filter with systematic resampling, same output layout as pmf_run.
std::vector<FilterOutput> bootstrap_pf(const DiscreteModel& dm, const MeasModel& mm,
                                       const std::vector<double>& zs, int n_particles,
                                       std::uint64_t seed, const GaussianPrior& prior);

/// Linear Kalman filter, same output layout as pmf_run.
std::vector<FilterOutput> kalman_reference(const DiscreteModel& dm, const Mat& H, const Mat& R,
                                           const std::vector<Vec>& zs, const GaussianPrior& prior);

}  // namespace pmf
