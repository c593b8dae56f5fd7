#include "pmf/filters.hpp"

#include "pmf/fdm.hpp"
#include "pmf/sine.hpp"
#include "pmf/spectral.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace pmf {

Solver parse_solver(const std::string& name) {
    if (name == "fdm") return Solver::Fdm;
    if (name == "sine") return Solver::Sine;
    if (name == "spectral") return Solver::Spectral;
    throw Error("unknown solver '" + name + "' (expected fdm, sine or spectral)");
}

std::string to_string(Solver s) {
    switch (s) {
        case Solver::Fdm: return "fdm";
        case Solver::Sine: return "sine";
        case Solver::Spectral: return "spectral";
    }
    return "unknown";
}

BayesUpdate measurement_update(const PMD& p, const MeasModel& mm, double z) {
    const Mat X = p.grid.points();
    PMD post{std::vector<double>(p.weights.size()), p.grid, false};
    double sum = 0.0;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        if (p.weights[i] == 0.0) continue;
        const double innovation = z - mm.h(X.col(static_cast<Eigen::Index>(i)));
        post.weights[i] = p.weights[i] * gm_pdf(mm.noise, innovation);
        sum += post.weights[i];
    }
    if (!(sum > 0.0)) throw Error("measurement incompatible with grid support");
    BayesUpdate out;
    out.likelihood = sum * p.grid.cell_volume() / p.mass();
    out.posterior = normalize(std::move(post));
    return out;
}

PMD time_update(const PMD& p, const CtModel& m, Solver solver, double tau, const PmfConfig& cfg) {
    if (solver == Solver::Spectral) {
        const int l = cfg.fixed_substeps > 0 ? cfg.fixed_substeps : cfg.spectral_substeps;
        return spectral_predict(p, m, tau, l);
    }
    const int l = cfg.fixed_substeps > 0 ? cfg.fixed_substeps : fdm_default_substeps(m, p.grid, tau);
    return solver == Solver::Fdm ? fdm_predict(p, m, tau, l) : sine_predict(p, m, tau, l);
}

MovingGrid design_grid(const Moments& filtering, const CtModel& m, const PmfConfig& cfg,
                       const MovingGrid& previous) {
    const int n = static_cast<int>(filtering.mean.size());
    Mat cov = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double floor = previous.spacing(i) * previous.spacing(i);
        cov(i, i) = std::max(filtering.cov(i, i) + m.Q(i, i) * cfg.Ts, floor);
    }
    return build_grid(filtering.mean, cov, cfg.n_pa, cfg.k_sigma);
}

MovingGrid design_grid(const Moments& filtering, const CtModel& m, const PmfConfig& cfg) {
    const int n = static_cast<int>(filtering.mean.size());
    Mat cov = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) cov(i, i) = filtering.cov(i, i) + m.Q(i, i) * cfg.Ts;
    return build_grid(filtering.mean, cov, cfg.n_pa, cfg.k_sigma);
}

std::vector<FilterOutput> pmf_run(const CtModel& m, const MeasModel& mm, const std::vector<double>& zs,
                                  Solver solver, const PmfConfig& cfg, const GaussianPrior& prior) {
    if (prior.mean.size() != m.nx()) throw Error("prior dimension does not match the model");
    std::vector<FilterOutput> out;
    out.reserve(zs.size() + 1);
    out.push_back({prior.mean, prior.cov, 0.0, 0.0});

    const Mat prior_inv = prior.cov.inverse();
    const double prior_norm =
        1.0 / std::sqrt(std::pow(2.0 * kPi, m.nx()) * prior.cov.determinant());
    auto prior_pdf = [&](const Vec& x) {
        const Vec d = x - prior.mean;
        return prior_norm * std::exp(-0.5 * d.dot(prior_inv * d));
    };
    PMD density = pmd_from_pdf(prior_pdf, build_grid(prior.mean, prior.cov, cfg.n_pa, cfg.k_sigma));

    for (std::size_t k = 0; k < zs.size(); ++k) {
        double seconds = 0.0;
        if (k > 0) {
            const auto start = std::chrono::steady_clock::now();
            density = time_update(density, m, solver, cfg.Ts, cfg);
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        BayesUpdate upd = measurement_update(density, mm, zs[k]);
        const Moments mom = moments(upd.posterior);
        out.push_back({mom.mean, mom.cov, std::log(upd.likelihood), seconds});
        if (k + 1 < zs.size()) {
            density = regrid(upd.posterior, design_grid(mom, m, cfg, upd.posterior.grid));
        }
    }
    return out;
}

namespace {

Mat covariance_factor(const Mat& cov) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    const Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
}

Vec draw(const Mat& factor, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vec n(factor.cols());
    for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = normal(rng);
    return factor * n;
}

}  // namespace

std::vector<FilterOutput> bootstrap_pf(const DiscreteModel& dm, const MeasModel& mm,
                                       const std::vector<double>& zs, int n_particles,
                                       std::uint64_t seed, const GaussianPrior& prior) {
    if (n_particles < 1) throw Error("particle count must be positive");
    const int nx = static_cast<int>(prior.mean.size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<FilterOutput> out;
    out.push_back({prior.mean, prior.cov, 0.0, 0.0});

    const Mat prior_factor = covariance_factor(prior.cov);
    const Mat noise_factor = covariance_factor(dm.Qd);
    Mat particles(nx, n_particles);
    for (int i = 0; i < n_particles; ++i) particles.col(i) = prior.mean + draw(prior_factor, rng);
    Mat resampled(nx, n_particles);
    std::vector<double> w(n_particles);

    for (std::size_t k = 0; k < zs.size(); ++k) {
        double seconds = 0.0;
        if (k > 0) {
            const auto start = std::chrono::steady_clock::now();
            particles = dm.F * particles;
            for (int i = 0; i < n_particles; ++i) particles.col(i) += draw(noise_factor, rng);
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        double sum = 0.0;
        for (int i = 0; i < n_particles; ++i) {
            w[i] = gm_pdf(mm.noise, zs[k] - mm.h(particles.col(i)));
            sum += w[i];
        }
        if (!(sum > 0.0)) throw Error("particle weights degenerated to zero");
        Vec mean = Vec::Zero(nx);
        for (int i = 0; i < n_particles; ++i) {
            w[i] /= sum;
            mean += w[i] * particles.col(i);
        }
        Mat cov = Mat::Zero(nx, nx);
        for (int i = 0; i < n_particles; ++i) {
            const Vec d = particles.col(i) - mean;
            cov.noalias() += w[i] * d * d.transpose();
        }

        // systematic resampling
        const double u0 = uniform(rng) / n_particles;
        double cumulative = w[0];
        int src = 0;
        for (int i = 0; i < n_particles; ++i) {
            const double u = u0 + static_cast<double>(i) / n_particles;
            while (u > cumulative && src < n_particles - 1) cumulative += w[++src];
            resampled.col(i) = particles.col(src);
        }
        particles.swap(resampled);
        out.push_back({mean, 0.5 * (cov + cov.transpose()), std::log(sum / n_particles), seconds});
    }
    return out;
}

std::vector<FilterOutput> kalman_reference(const DiscreteModel& dm, const Mat& H, const Mat& R,
                                           const std::vector<Vec>& zs, const GaussianPrior& prior) {
    std::vector<FilterOutput> out;
    out.push_back({prior.mean, prior.cov, 0.0, 0.0});
    Vec x = prior.mean;
    Mat P = prior.cov;
    const int nx = static_cast<int>(x.size());
    for (std::size_t k = 0; k < zs.size(); ++k) {
        if (k > 0) {
            x = dm.F * x;
            P = dm.F * P * dm.F.transpose() + dm.Qd;
        }
        const Vec innovation = zs[k] - H * x;
        const Mat S = H * P * H.transpose() + R;
        const Eigen::LDLT<Mat> S_ldlt(S);
        const Mat K = S_ldlt.solve(H * P).transpose();
        x += K * innovation;
        // Joseph form keeps P symmetric PSD
        const Mat IKH = Mat::Identity(nx, nx) - K * H;
        P = IKH * P * IKH.transpose() + K * R * K.transpose();
        const double loglik = -0.5 * (innovation.dot(S_ldlt.solve(innovation)) +
                                      std::log(S.determinant()) +
                                      static_cast<double>(innovation.size()) * std::log(2.0 * kPi));
        out.push_back({x, P, loglik, 0.0});
    }
    return out;
}

}  // namespace pmf
