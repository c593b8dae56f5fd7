#include "pmf/bench.hpp"

#include "pmf/fdm.hpp"
#include "pmf/grid.hpp"
#include "pmf/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace pmf {

// ---------------------------------------------------------------------------------------
// Terrain
// ---------------------------------------------------------------------------------------

bool TerrainMap::contains(double x, double y) const {
    return x >= x0 && x <= x_max() && y >= y0 && y <= y_max();
}

double TerrainMap::altitude(double x, double y) const {
    if (!contains(x, y)) {
        std::ostringstream msg;
        msg << "terrain query (" << x << ", " << y << ") outside the map extent";
        throw Error(msg.str());
    }
    const double u = (x - x0) / dx;
    const double v = (y - y0) / dy;
    const int ix = std::min(static_cast<int>(u), nx - 2);
    const int iy = std::min(static_cast<int>(v), ny - 2);
    const double fx = u - ix;
    const double fy = v - iy;
    return (1.0 - fy) * ((1.0 - fx) * node(ix, iy) + fx * node(ix + 1, iy)) +
           fy * ((1.0 - fx) * node(ix, iy + 1) + fx * node(ix + 1, iy + 1));
}

TerrainMap synth_terrain(std::uint64_t seed, const Box& extent, double roughness, double cell) {
    if (!(extent.x_max > extent.x_min) || !(extent.y_max > extent.y_min) || !(cell > 0.0)) {
        throw Error("terrain extent and cell size must be positive");
    }
    TerrainMap tm;
    tm.x0 = extent.x_min;
    tm.y0 = extent.y_min;
    tm.dx = cell;
    tm.dy = cell;
    tm.nx = static_cast<int>(std::ceil((extent.x_max - extent.x_min) / cell)) + 1;
    tm.ny = static_cast<int>(std::ceil((extent.y_max - extent.y_min) / cell)) + 1;
    tm.altitudes.assign(static_cast<std::size_t>(tm.nx) * tm.ny, 300.0);
    if (roughness == 0.0) return tm;

    constexpr int kModes = 64;
    const double shortest = 4.0 * cell;
    const double longest = std::max(extent.x_max - extent.x_min, extent.y_max - extent.y_min);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    struct Mode {
        double kx, ky, phase, amplitude;
    };
    std::vector<Mode> modes(kModes);
    double power = 0.0;
    for (auto& mode : modes) {
        const double lambda = shortest * std::pow(longest / shortest, uniform(rng));
        const double theta = 2.0 * kPi * uniform(rng);
        mode.kx = 2.0 * kPi / lambda * std::cos(theta);
        mode.ky = 2.0 * kPi / lambda * std::sin(theta);
        mode.phase = 2.0 * kPi * uniform(rng);
        mode.amplitude = lambda;  // equal slope energy per mode
        power += 0.5 * mode.amplitude * mode.amplitude;
    }
    const double scale = roughness / std::sqrt(power);
    for (int iy = 0; iy < tm.ny; ++iy) {
        const double y = tm.y0 + iy * tm.dy;
        for (int ix = 0; ix < tm.nx; ++ix) {
            const double x = tm.x0 + ix * tm.dx;
            double h = 0.0;
            for (const auto& mode : modes) h += mode.amplitude * std::cos(mode.kx * x + mode.ky * y + mode.phase);
            tm.altitudes[static_cast<std::size_t>(iy) * tm.nx + ix] += scale * h;
        }
    }
    return tm;
}

void save_terrain(const TerrainMap& tm, std::ostream& os) {
    os.precision(17);
    os << "origin " << tm.x0 << ' ' << tm.y0 << '\n';
    os << "cell " << tm.dx << ' ' << tm.dy << '\n';
    os << "dims " << tm.nx << ' ' << tm.ny << '\n';
    for (int iy = 0; iy < tm.ny; ++iy) {
        for (int ix = 0; ix < tm.nx; ++ix) os << (ix ? " " : "") << tm.node(ix, iy);
        os << '\n';
    }
}

TerrainMap load_terrain(std::istream& is) {
    TerrainMap tm;
    std::string tag;
    if (!(is >> tag >> tm.x0 >> tm.y0) || tag != "origin") throw Error("terrain file: expected 'origin x y'");
    if (!(is >> tag >> tm.dx >> tm.dy) || tag != "cell") throw Error("terrain file: expected 'cell dx dy'");
    if (!(is >> tag >> tm.nx >> tm.ny) || tag != "dims") throw Error("terrain file: expected 'dims nx ny'");
    if (tm.nx < 2 || tm.ny < 2 || !(tm.dx > 0.0) || !(tm.dy > 0.0)) throw Error("terrain file: invalid header");
    tm.altitudes.resize(static_cast<std::size_t>(tm.nx) * tm.ny);
    for (double& a : tm.altitudes) {
        if (!(is >> a) || !std::isfinite(a)) throw Error("terrain file: missing or invalid altitude");
    }
    return tm;
}

MeasModel terrain_measurement(const TerrainMap& tm, const GaussianMixture& noise, int ix, int iy) {
    MeasModel mm;
    // grid points beyond the map read the nearest edge altitude
    mm.h = [&tm, ix, iy](const Vec& x) {
        return tm.altitude(std::clamp(x[ix], tm.x0, tm.x_max()), std::clamp(x[iy], tm.y0, tm.y_max()));
    };
    mm.noise = noise;
    mm.nz = 1;
    return mm;
}

// ---------------------------------------------------------------------------------------
// Simulation and metrics
// ---------------------------------------------------------------------------------------

double sample_mixture(const GaussianMixture& gm, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal;
    const double u = uniform(rng);
    std::size_t g = 0;
    double cumulative = gm.weights[0];
    while (u > cumulative && g + 1 < gm.size()) cumulative += gm.weights[++g];
    return gm.means[g] + std::sqrt(gm.variances[g]) * normal(rng);
}

namespace {

Mat psd_factor(const Mat& cov) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Vec standard_normal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

}  // namespace

Trajectory simulate(const DiscreteModel& dm, const TerrainMap& tm, const GaussianMixture& noise, int T,
                    std::uint64_t seed, const GaussianPrior& prior, int ix, int iy) {
    if (T < 0) throw Error("trajectory length must be nonnegative");
    std::mt19937_64 rng(seed);
    const int n = static_cast<int>(prior.mean.size());
    const Mat prior_factor = psd_factor(prior.cov);
    const Mat noise_factor = psd_factor(dm.Qd);
    Trajectory traj;
    Vec x = prior.mean + prior_factor * standard_normal(n, rng);
    for (int k = 0; k <= T; ++k) {
        if (!tm.contains(x[ix], x[iy])) throw Error("trajectory exits terrain extent");
        traj.states.push_back(x);
        traj.measurements.push_back(tm.altitude(x[ix], x[iy]) + sample_mixture(noise, rng));
        x = dm.F * x + noise_factor * standard_normal(n, rng);
    }
    return traj;
}

double rmse(const std::vector<std::vector<Vec>>& truth, const std::vector<std::vector<Vec>>& estimates,
            int j) {
    if (truth.size() != estimates.size() || truth.empty()) throw Error("run counts differ or are zero");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < truth.size(); ++m) {
        if (truth[m].size() != estimates[m].size() || truth[m].size() != truth[0].size()) {
            throw Error("trajectory lengths differ");
        }
        for (std::size_t k = 0; k < truth[m].size(); ++k) {
            const double e = truth[m][k][j] - estimates[m][k][j];
            sum += e * e;
            ++count;
        }
    }
    return std::sqrt(sum / static_cast<double>(count));
}

double astd(const std::vector<std::vector<Mat>>& covariances, int j) {
    if (covariances.empty()) throw Error("no runs to average");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& run : covariances) {
        if (run.size() != covariances[0].size()) throw Error("trajectory lengths differ");
        for (const auto& P : run) {
            if (P(j, j) < 0.0) throw Error("negative variance in covariance sequence");
            sum += P(j, j);
            ++count;
        }
    }
    return std::sqrt(sum / static_cast<double>(count));
}

// ---------------------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------------------

GaussianMixture convergence_density(const std::string& name) {
    if (name == "gauss") return GaussianMixture({1.0}, {0.0}, {1.0});
    if (name == "gm") return GaussianMixture({0.3, 0.4, 0.3}, {-1.5, 0.0, 2.0}, {0.25, 0.36, 0.16});
    throw Error("unknown test density '" + name + "' (expected gauss or gm)");
}

ConvergenceRow convergence_point(const std::string& density, int n, const std::string& solver,
                                 const ConvergenceConfig& cfg) {
    const GaussianMixture start = convergence_density(density);
    const MovingGrid grid = build_grid(Vec::Constant(1, start.mean()), Mat::Constant(1, 1, start.variance()), n,
                                       cfg.k_sigma);
    const PMD p = pmd_from_pdf([&](const Vec& x) { return gm_pdf(start, x[0]); }, grid);
    const CtModel model(Mat::Zero(1, 1), Mat::Constant(1, 1, cfg.q));

    const auto t0 = std::chrono::steady_clock::now();
    PMD predicted;
    switch (parse_solver(solver)) {
        case Solver::Fdm:
            predicted = fdm_predict(p, model, cfg.tau, fdm_default_substeps(model, grid, cfg.tau));
            break;
        case Solver::Spectral:
            predicted = spectral_predict(p, model, cfg.tau, cfg.spectral_substeps);
            break;
        case Solver::Sine:
            throw Error("the convergence study compares fdm and spectral only");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    GaussianMixture exact = start;
    for (double& v : exact.variances) v += cfg.q * cfg.tau;
    double error = 0.0;
    for (std::size_t i = 0; i < predicted.weights.size(); ++i) {
        const double x = predicted.grid.point(i)[0];
        error = std::max(error, std::abs(predicted.weights[i] - gm_pdf(exact, x)));
    }
    return {density, n, solver, error, seconds};
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& cfg) {
    std::vector<ConvergenceRow> rows;
    for (const auto& density : cfg.densities) {
        for (int n : cfg.n) {
            for (const auto& solver : cfg.solvers) rows.push_back(convergence_point(density, n, solver, cfg));
        }
    }
    return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
    os.precision(17);
    os << "density,N,solver,error,seconds\n";
    for (const auto& r : rows) {
        os << r.density << ',' << r.n << ',' << r.solver << ',' << r.error << ',' << r.seconds << '\n';
    }
}

// ---------------------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------------------

ScenarioConfig parse_scenario(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("config must be a JSON object");
    ScenarioConfig c;
    static const std::set<std::string> known = {
        "scenario", "alpha_deg", "Ts", "T", "q", "prior_mean", "prior_cov", "solver", "filters",
        "N_pa", "k_sigma", "l", "M", "seed", "particles", "noise_weights", "noise_means",
        "noise_variances", "terrain_seed", "terrain_roughness", "terrain_cell", "terrain_margin",
        "threads"};
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) throw Error("unknown config key '" + item.key() + "'");
    }
    auto read = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception&) {
            throw Error(std::string("config key '") + key + "' has the wrong type");
        }
    };
    read("scenario", c.scenario);
    read("alpha_deg", c.alpha_deg);
    read("Ts", c.Ts);
    read("T", c.T);
    read("q", c.q);
    read("prior_mean", c.prior_mean);
    read("prior_cov", c.prior_cov);
    read("solver", c.solver);
    read("filters", c.filters);
    read("N_pa", c.N_pa);
    read("k_sigma", c.k_sigma);
    read("l", c.l);
    read("M", c.M);
    read("seed", c.seed);
    read("particles", c.particles);
    read("noise_weights", c.noise_weights);
    read("noise_means", c.noise_means);
    read("noise_variances", c.noise_variances);
    read("terrain_seed", c.terrain_seed);
    read("terrain_roughness", c.terrain_roughness);
    read("terrain_cell", c.terrain_cell);
    read("terrain_margin", c.terrain_margin);
    read("threads", c.threads);

    if (c.scenario != "ct2d" && c.scenario != "ct4d") throw Error("scenario must be ct2d or ct4d");
    if (!(c.Ts > 0.0) || c.T < 0 || c.M < 1 || c.l < 1 || c.particles < 1 || c.threads < 1 ||
        !(c.k_sigma > 0.0) || !(c.q >= 0.0) || !(c.terrain_cell > 0.0) || !(c.terrain_margin >= 0.0)) {
        throw Error("config values must be positive where applicable");
    }
    if (c.N_pa < 4 || c.N_pa % 2 != 0) throw Error("N_pa must be even and at least 4");
    parse_solver(c.solver);
    for (const auto& f : c.filters) {
        if (f != "pf" && f != "pmf") parse_solver(f);
    }
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

Scenario build_scenario(const ScenarioConfig& cfg) {
    const double alpha = deg2rad(cfg.alpha_deg);
    Scenario sc;
    if (cfg.scenario == "ct2d") {
        Mat A(2, 2);
        A << 0.0, -alpha, alpha, 0.0;
        sc.model = CtModel(A, cfg.q * Mat::Identity(2, 2));
        sc.ix = 0;
        sc.iy = 1;
    } else {
        const CtModel ct = coordinated_turn(alpha);
        sc.model = CtModel(ct.A, cfg.q * ct.Q);
        sc.ix = 0;
        sc.iy = 2;
    }
    const int n = sc.model.nx();
    if (static_cast<int>(cfg.prior_mean.size()) != n || static_cast<int>(cfg.prior_cov.size()) != n) {
        throw Error("prior_mean and prior_cov must have one entry per state");
    }
    sc.discrete = discretize(sc.model, cfg.Ts);
    sc.prior.mean = Eigen::Map<const Vec>(cfg.prior_mean.data(), n);
    sc.prior.cov = Eigen::Map<const Vec>(cfg.prior_cov.data(), n).asDiagonal();
    sc.noise = GaussianMixture(cfg.noise_weights, cfg.noise_means, cfg.noise_variances);

    // map covers the noise-free mean trajectory plus a margin
    Box box{sc.prior.mean[sc.ix], sc.prior.mean[sc.ix], sc.prior.mean[sc.iy], sc.prior.mean[sc.iy]};
    Vec x = sc.prior.mean;
    for (int k = 0; k <= cfg.T; ++k) {
        box.x_min = std::min(box.x_min, x[sc.ix]);
        box.x_max = std::max(box.x_max, x[sc.ix]);
        box.y_min = std::min(box.y_min, x[sc.iy]);
        box.y_max = std::max(box.y_max, x[sc.iy]);
        x = sc.discrete.F * x;
    }
    box.x_min -= cfg.terrain_margin;
    box.x_max += cfg.terrain_margin;
    box.y_min -= cfg.terrain_margin;
    box.y_max += cfg.terrain_margin;
    sc.terrain = synth_terrain(cfg.terrain_seed, box, cfg.terrain_roughness, cfg.terrain_cell);
    return sc;
}

// ---------------------------------------------------------------------------------------
// Monte-Carlo benchmark
// ---------------------------------------------------------------------------------------

std::uint64_t run_seed(std::uint64_t master, std::uint64_t run) {
    // splitmix64 of the pair
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (run + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<FilterOutput> run_filter(const std::string& filter, const Scenario& sc, const ScenarioConfig& cfg,
                                     const Trajectory& traj, std::uint64_t seed) {
    const MeasModel mm = terrain_measurement(sc.terrain, sc.noise, sc.ix, sc.iy);
    std::vector<FilterOutput> out;
    if (filter == "pf") {
        out = bootstrap_pf(sc.discrete, mm, traj.measurements, cfg.particles, seed, sc.prior);
    } else {
        PmfConfig pc;
        pc.n_pa = cfg.N_pa;
        pc.k_sigma = cfg.k_sigma;
        pc.Ts = cfg.Ts;
        pc.spectral_substeps = cfg.l;
        // "pmf" is the point-mass filter with the configured solver
        const Solver solver = parse_solver(filter == "pmf" ? cfg.solver : filter);
        out = pmf_run(sc.model, mm, traj.measurements, solver, pc, sc.prior);
    }
    out.erase(out.begin());
    return out;
}

std::vector<MetricsReport> mc_benchmark(const ScenarioConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    const int n = sc.model.nx();
    const std::size_t nf = cfg.filters.size();

    struct RunResult {
        bool ok = false;
        std::string error;
        std::vector<Vec> truth;
        std::vector<std::vector<FilterOutput>> outputs;
    };
    std::vector<RunResult> results(cfg.M);

    auto run_one = [&](int r) {
        RunResult res;
        try {
            const std::uint64_t seed = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
            const Trajectory traj = simulate(sc.discrete, sc.terrain, sc.noise, cfg.T, seed, sc.prior, sc.ix, sc.iy);
            for (const auto& f : cfg.filters) {
                res.outputs.push_back(run_filter(f, sc, cfg, traj, run_seed(seed, 0xF11E)));
            }
            res.truth = traj.states;
            res.ok = true;
        } catch (const Error& e) {
            res.ok = false;
            res.error = e.what();
        }
        results[r] = std::move(res);
    };

    if (cfg.threads <= 1) {
        for (int r = 0; r < cfg.M; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (int t = 0; t < std::min(cfg.threads, cfg.M); ++t) {
            pool.emplace_back([&] {
                for (int r = next++; r < cfg.M; r = next++) run_one(r);
            });
        }
    }

    std::vector<MetricsReport> reports(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        MetricsReport& rep = reports[f];
        rep.filter = cfg.filters[f];
        std::vector<std::vector<Vec>> truth, est;
        std::vector<std::vector<Mat>> covs;
        double seconds = 0.0;
        int epochs = 0;
        for (const auto& res : results) {
            if (!res.ok) {
                ++rep.failed;
                if (rep.failure.empty()) rep.failure = res.error;
                continue;
            }
            ++rep.runs;
            truth.push_back(res.truth);
            std::vector<Vec> e;
            std::vector<Mat> c;
            for (std::size_t k = 0; k < res.outputs[f].size(); ++k) {
                const auto& o = res.outputs[f][k];
                e.push_back(o.mean);
                c.push_back(o.cov);
                if (k > 0) {
                    seconds += o.seconds;
                    ++epochs;
                }
            }
            est.push_back(std::move(e));
            covs.push_back(std::move(c));
        }
        rep.seconds = epochs > 0 ? seconds / epochs : 0.0;
        for (int j = 0; j < n; ++j) {
            rep.rmse.push_back(rep.runs > 0 ? rmse(truth, est, j) : std::nan(""));
            rep.astd.push_back(rep.runs > 0 ? astd(covs, j) : std::nan(""));
        }
    }
    return reports;
}

void write_metrics_csv(const std::vector<MetricsReport>& reports, std::ostream& os) {
    os.precision(17);
    const std::size_t n = reports.empty() ? 0 : reports.front().rmse.size();
    os << "filter";
    for (std::size_t j = 1; j <= n; ++j) os << ",RMSE" << j;
    for (std::size_t j = 1; j <= n; ++j) os << ",ASTD" << j;
    os << ",runs,failed\n";
    for (const auto& r : reports) {
        os << r.filter;
        for (double v : r.rmse) os << ',' << v;
        for (double v : r.astd) os << ',' << v;
        os << ',' << r.runs << ',' << r.failed << '\n';
    }
}

void write_timing_csv(const std::vector<MetricsReport>& reports, std::ostream& os) {
    os.precision(17);
    os << "filter,TIME\n";
    for (const auto& r : reports) os << r.filter << ',' << r.seconds << '\n';
}

}  // namespace pmf
