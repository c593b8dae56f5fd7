// Command line driver: convergence study, single tracking run, Monte-Carlo benchmark.

#include "pmf/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw pmf::Error("cannot write '" + path.string() + "'");
    return os;
}

void write_run(const fs::path& path, const std::vector<pmf::FilterOutput>& out) {
    auto os = open_out(path);
    os.precision(17);
    const auto n = out.front().mean.size();
    os << "k";
    for (Eigen::Index j = 1; j <= n; ++j) os << ",mean" << j;
    for (Eigen::Index j = 1; j <= n; ++j) os << ",var" << j;
    os << ",loglik,seconds\n";
    for (std::size_t k = 0; k < out.size(); ++k) {
        os << k;
        for (Eigen::Index j = 0; j < n; ++j) os << ',' << out[k].mean[j];
        for (Eigen::Index j = 0; j < n; ++j) os << ',' << out[k].cov(j, j);
        os << ',' << out[k].log_likelihood << ',' << out[k].seconds << '\n';
    }
}

int converge(const pmf::ConvergenceConfig& cfg, const std::string& out) {
    const auto rows = pmf::convergence_study(cfg);
    auto os = open_out(out);
    pmf::write_convergence_csv(rows, os);
    for (const auto& r : rows) {
        std::cout << r.density << " N=" << r.n << " " << r.solver << " error=" << r.error << "\n";
    }
    return 0;
}

int track(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    pmf::ScenarioConfig cfg = pmf::load_scenario(config);
    if (seed) cfg.seed = *seed;
    const pmf::Scenario sc = pmf::build_scenario(cfg);
    const std::uint64_t run = pmf::run_seed(cfg.seed, 0);
    const auto traj = pmf::simulate(sc.discrete, sc.terrain, sc.noise, cfg.T, run, sc.prior, sc.ix, sc.iy);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        auto os = open_out(dir / "truth.csv");
        os.precision(17);
        os << "k";
        for (int j = 1; j <= sc.model.nx(); ++j) os << ",x" << j;
        os << ",z\n";
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            os << k;
            for (int j = 0; j < sc.model.nx(); ++j) os << ',' << traj.states[k][j];
            os << ',' << traj.measurements[k] << '\n';
        }
    }
    {
        auto os = open_out(dir / "terrain.txt");
        pmf::save_terrain(sc.terrain, os);
    }
    for (const auto& f : cfg.filters) {
        write_run(dir / (f + ".csv"), pmf::run_filter(f, sc, cfg, traj, pmf::run_seed(run, 0xF11E)));
        std::cout << "wrote " << (dir / (f + ".csv")).string() << "\n";
    }
    return 0;
}

int bench(const std::string& config, const std::vector<std::string>& filters, std::optional<int> mc,
          std::optional<std::uint64_t> seed, std::optional<int> threads, const std::string& out) {
    pmf::ScenarioConfig cfg = config.empty() ? pmf::ScenarioConfig{} : pmf::load_scenario(config);
    if (!filters.empty()) cfg.filters = filters;
    if (mc) cfg.M = *mc;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    const auto reports = pmf::mc_benchmark(cfg);
    for (const auto& r : reports) {
        if (r.failed > 0) std::cerr << r.filter << ": " << r.failed << " failed run(s), first: " << r.failure << "\n";
    }
    {
        auto os = open_out(out);
        pmf::write_metrics_csv(reports, os);
    }
    fs::path timing(out);
    timing.replace_filename(timing.stem().string() + "_timing.csv");
    {
        auto os = open_out(timing);
        pmf::write_timing_csv(reports, os);
    }
    pmf::write_metrics_csv(reports, std::cout);
    pmf::write_timing_csv(reports, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-based continuous-time filtering: solvers, convergence study and benchmarks"};
    app.require_subcommand(1);

    pmf::ConvergenceConfig conv;
    std::string conv_out = "convergence.csv";
    auto* cmd_converge = app.add_subcommand("converge", "Time-update accuracy against the heat kernel");
    cmd_converge->add_option("--densities", conv.densities, "Test densities (gauss, gm)")->delimiter(',');
    cmd_converge->add_option("--n", conv.n, "Grid sizes (even)")->delimiter(',');
    cmd_converge->add_option("--solver", conv.solvers, "Solvers (fdm, spectral)")->delimiter(',');
    cmd_converge->add_option("--tau", conv.tau, "Prediction horizon");
    cmd_converge->add_option("--q", conv.q, "Diffusion coefficient");
    cmd_converge->add_option("--k-sigma", conv.k_sigma, "Grid half-width in standard deviations");
    cmd_converge->add_option("--substeps", conv.spectral_substeps, "Spectral Euler substeps");
    cmd_converge->add_option("--out", conv_out, "Output CSV");

    std::string track_config;
    std::string track_out = "track";
    std::optional<std::uint64_t> track_seed;
    auto* cmd_track = app.add_subcommand("track", "One simulated tracking run with every configured filter");
    cmd_track->add_option("--config", track_config, "Scenario config (JSON)")->required();
    cmd_track->add_option("--out", track_out, "Output directory");
    cmd_track->add_option("--seed", track_seed, "Override the master seed");

    std::string bench_config;
    std::vector<std::string> bench_filters;
    std::optional<int> bench_mc;
    std::optional<std::uint64_t> bench_seed;
    std::optional<int> bench_threads;
    std::string bench_out = "bench.csv";
    auto* cmd_bench = app.add_subcommand("bench", "Monte-Carlo RMSE/ASTD table");
    cmd_bench->add_option("--config", bench_config, "Scenario config (JSON); defaults when omitted");
    cmd_bench->add_option("--filters", bench_filters, "Filters (spectral, sine, fdm, pmf, pf)")->delimiter(',');
    cmd_bench->add_option("--mc", bench_mc, "Monte-Carlo runs");
    cmd_bench->add_option("--seed", bench_seed, "Master seed");
    cmd_bench->add_option("--threads", bench_threads, "Worker threads");
    cmd_bench->add_option("--out", bench_out, "Output CSV (timing goes to <stem>_timing.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_converge) return converge(conv, conv_out);
        if (*cmd_track) return track(track_config, track_out, track_seed);
        if (*cmd_bench) return bench(bench_config, bench_filters, bench_mc, bench_seed, bench_threads, bench_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
