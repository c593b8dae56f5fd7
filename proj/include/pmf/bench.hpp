#pragma once

#include "pmf/filters.hpp"
#include "pmf/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace pmf {

/// Altitude table over a regular lattice, bilinear in between.  Row iy holds the nodes
/// at y = y0 + iy * dy.
struct TerrainMap {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> altitudes;

    [[nodiscard]] double node(int ix, int iy) const { return altitudes[static_cast<std::size_t>(iy) * nx + ix]; }
    [[nodiscard]] double x_max() const { return x0 + (nx - 1) * dx; }
    [[nodiscard]] double y_max() const { return y0 + (ny - 1) * dy; }
    [[nodiscard]] bool contains(double x, double y) const;
    /// Throws when (x, y) is outside the lattice.
    [[nodiscard]] double altitude(double x, double y) const;
};

struct Box {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
};

/// Random-phase sum of plane waves with a power-law spectrum.  Altitude standard
/// deviation is `roughness` metres around a 300 m base level.
TerrainMap synth_terrain(std::uint64_t seed, const Box& extent, double roughness, double cell = 10.0);

void save_terrain(const TerrainMap& tm, std::ostream& os);
TerrainMap load_terrain(std::istream& is);

/// Measurement model reading the altitude below the position components (ix, iy) of the state.
/// Positions beyond the map are clamped to its edge.
MeasModel terrain_measurement(const TerrainMap& tm, const GaussianMixture& noise, int ix, int iy);

struct Trajectory {
    std::vector<Vec> states;
    std::vector<double> measurements;
};

/// x_0 ~ prior, x_{k+1} = F x_k + w_k, z_k = terrain(x_k) + v_k for k = 0..T.
Trajectory simulate(const DiscreteModel& dm, const TerrainMap& tm, const GaussianMixture& noise, int T,
                    std::uint64_t seed, const GaussianPrior& prior, int ix, int iy);

/// Draw from a scalar Gaussian mixture.
double sample_mixture(const GaussianMixture& gm, std::mt19937_64& rng);

/// Root-mean-square error of component j over runs [m][k].
double rmse(const std::vector<std::vector<Vec>>& truth, const std::vector<std::vector<Vec>>& estimates,
            int j);

/// Square root of the mean (j, j) covariance entry over runs [m][k].
double astd(const std::vector<std::vector<Mat>>& covariances, int j);

// ---------------------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------------------

struct ConvergenceConfig {
    std::vector<std::string> densities{"gauss", "gm"};
    std::vector<int> n{16, 32, 64, 128, 200};
    std::vector<std::string> solvers{"fdm", "spectral"};
    double tau = 0.5;
    double q = 1.0;
    double k_sigma = 6.0;
    int spectral_substeps = 4000;
};

struct ConvergenceRow {
    std::string density;
    int n = 0;
    std::string solver;
    double error = 0.0;
    double seconds = 0.0;
};

/// Initial test density of the study as a mixture ("gauss" is a single component).
GaussianMixture convergence_density(const std::string& name);

/// Max-abs error of one pure-diffusion prediction against the analytic heat kernel.
ConvergenceRow convergence_point(const std::string& density, int n, const std::string& solver,
                                 const ConvergenceConfig& cfg);

std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& cfg);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);

// ---------------------------------------------------------------------------------------
// Tracking scenario and Monte-Carlo benchmark
// ---------------------------------------------------------------------------------------

struct ScenarioConfig {
    /// "ct2d": position-only rotation about the origin; "ct4d": full coordinated turn.
    std::string scenario = "ct2d";
    double alpha_deg = 2.0;
    double Ts = 1.0;
    int T = 20;
    /// Diffusion intensity on the noise-driven states.
    double q = 4.0;
    std::vector<double> prior_mean{1000.0, 0.0};
    std::vector<double> prior_cov{90.0, 5.0};
    /// Solver of the "pmf" filter entry.
    std::string solver = "spectral";
    /// Any of fdm, sine, spectral, pmf (the configured solver) and pf.
    std::vector<std::string> filters{"spectral", "sine", "pf"};
    int N_pa = 34;
    double k_sigma = 4.0;
    int l = 10;
    int M = 10;
    std::uint64_t seed = 1;
    int particles = 10000;
    std::vector<double> noise_weights{0.5, 0.5};
    std::vector<double> noise_means{0.0, 20.0};
    std::vector<double> noise_variances{1.0, 1.0};
    std::uint64_t terrain_seed = 7;
    double terrain_roughness = 30.0;
    double terrain_cell = 10.0;
    double terrain_margin = 400.0;
    int threads = 1;
};

/// Strict parse: every key must be a ScenarioConfig field name.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

struct Scenario {
    CtModel model;
    DiscreteModel discrete;
    GaussianPrior prior;
    GaussianMixture noise;
    TerrainMap terrain;
    int ix = 0;
    int iy = 1;
};

Scenario build_scenario(const ScenarioConfig& cfg);

struct MetricsReport {
    std::string filter;
    std::vector<double> rmse;
    std::vector<double> astd;
    /// Mean wall time per filter epoch (time update), seconds.
    double seconds = 0.0;
    int runs = 0;
    int failed = 0;
    /// Message of the first failed run, if any.
    std::string failure;
};

/// Seed of run r, derived from the master seed.
std::uint64_t run_seed(std::uint64_t master, std::uint64_t run);

/// Filter estimates of one run, entries k = 0..T (the prior entry dropped).
/// filter is a solver name, "pmf" for the configured solver, or "pf".
std::vector<FilterOutput> run_filter(const std::string& filter, const Scenario& sc, const ScenarioConfig& cfg,
                                     const Trajectory& traj, std::uint64_t seed);

std::vector<MetricsReport> mc_benchmark(const ScenarioConfig& cfg);

/// Per-filter RMSE and ASTD per state, without timing; byte-reproducible for a fixed config.
void write_metrics_csv(const std::vector<MetricsReport>& reports, std::ostream& os);
/// Per-filter mean epoch time.
void write_timing_csv(const std::vector<MetricsReport>& reports, std::ostream& os);

}  // namespace pmf
