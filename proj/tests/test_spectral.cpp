#include "pmf/fdm.hpp"
#include "pmf/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace pmf;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

CtModel scalar_model(double a, double q) { return CtModel(Mat::Constant(1, 1, a), Mat::Constant(1, 1, q)); }

// Uniform 1D grid on [0, L) (periodic sampling): N points with spacing L / N.
MovingGrid periodic_grid(int n, double L) {
    const double delta = L / n;
    return MovingGrid(n, v1(0.5 * (n - 1) * delta), Mat::Identity(1, 1), v1(delta));
}

PMD sampled(const MovingGrid& g, const std::function<double(double)>& f) {
    PMD p{std::vector<double>(g.size()), g, false};
    for (std::size_t i = 0; i < g.size(); ++i) p.weights[i] = f(g.point(i)[0]);
    return p;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

const GaussianMixture kGm({0.3, 0.4, 0.3}, {-1.5, 0.0, 2.0}, {0.25, 0.36, 0.16});

PMD gm_pmd(int n_pa) {
    const MovingGrid g = build_grid(v1(kGm.mean()), Mat::Constant(1, 1, kGm.variance()), n_pa, 6.0);
    return pmd_from_pdf([](const Vec& x) { return gm_pdf(kGm, x[0]); }, g);
}

// Max-abs error of a predicted GM density against the exact heat-kernel solution.
double gm_error(const PMD& out, double q_tau) {
    GaussianMixture exact = kGm;
    for (double& v : exact.variances) v += q_tau;
    double err = 0.0;
    for (std::size_t i = 0; i < out.weights.size(); ++i) {
        err = std::max(err, std::abs(out.weights[i] - gm_pdf(exact, out.grid.point(i)[0])));
    }
    return err;
}

}  // namespace

TEST_CASE("dft_forward") {
    SUBCASE("constant weights have only a DC component") {
        const MovingGrid g = build_grid(Vec::Zero(2), Mat::Identity(2, 2), 6, 2.0);
        const FreqPMD f = dft_forward(PMD{std::vector<double>(36, 2.5), g, false});
        CHECK(std::abs(f.coeffs[0] - std::complex<double>(2.5, 0.0)) < 1e-14);
        for (std::size_t i = 1; i < f.coeffs.size(); ++i) CHECK(std::abs(f.coeffs[i]) < 1e-14);
    }
    SUBCASE("round trip") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int n : {1, 2, 3}) {
            const MovingGrid g = build_grid(Vec::Zero(n), Mat::Identity(n, n), 10, 3.0);
            PMD p{std::vector<double>(g.size()), g, false};
            for (double& w : p.weights) w = u(rng);
            const PMD back = dft_inverse(dft_forward(p));
            for (std::size_t i = 0; i < p.weights.size(); ++i) CHECK(std::abs(back.weights[i] - p.weights[i]) < 1e-12);
        }
    }
    SUBCASE("cosine mode gives one half at plus and minus its frequency") {
        const int N = 16, s = 3;
        const double L = 5.0;
        const MovingGrid g = periodic_grid(N, L);
        const FreqPMD f = dft_forward(sampled(g, [&](double x) { return std::cos(2 * kPi * s * x / L); }));
        for (int k = 0; k < N; ++k) {
            const double expected = (k == s || k == N - s) ? 0.5 : 0.0;
            CHECK(std::abs(f.coeffs[k] - std::complex<double>(expected, 0.0)) < 1e-13);
        }
    }
    CHECK_THROWS_AS(dft_forward(PMD{std::vector<double>(5, 1.0), build_grid(v1(0.0), Mat::Identity(1, 1), 5, 1.0), false}),
                    Error);
}

TEST_CASE("dft_inverse") {
    const MovingGrid g = build_grid(Vec::Zero(2), Mat::Identity(2, 2), 8, 2.0);
    SUBCASE("zero tensor") {
        const PMD p = dft_inverse(FreqPMD{std::vector<std::complex<double>>(64), g});
        for (double w : p.weights) CHECK(w == 0.0);
    }
    SUBCASE("conjugate-symmetric spectrum gives a real tensor") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n01;
        std::vector<std::complex<double>> c(64);
        for (auto& z : c) z = {n01(rng), n01(rng)};
        // symmetrize: c[k] = conj(c[-k]) with indices taken modulo 8 on both axes
        std::vector<std::complex<double>> h(64);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) {
                const int mi = (8 - i) % 8, mj = (8 - j) % 8;
                h[i * 8 + j] = 0.5 * (c[i * 8 + j] + std::conj(c[mi * 8 + mj]));
            }
        }
        CHECK_NOTHROW(dft_inverse(FreqPMD{h, g}));
        // the same result from an independent direct sum
        const PMD p = dft_inverse(FreqPMD{h, g});
        for (int x = 0; x < 8; ++x) {
            for (int y = 0; y < 8; ++y) {
                std::complex<double> sum;
                for (int i = 0; i < 8; ++i) {
                    for (int j = 0; j < 8; ++j) sum += h[i * 8 + j] * std::polar(1.0, 2 * kPi * (i * x + j * y) / 8.0);
                }
                CHECK(p.weights[x * 8 + y] == doctest::Approx(sum.real()).epsilon(1e-12));
            }
        }
    }
    SUBCASE("asymmetric spectrum is an error") {
        std::vector<std::complex<double>> c(64);
        c[1] = {1.0, 0.0};
        CHECK_THROWS_AS(dft_inverse(FreqPMD{c, g}), Error);
    }
}

TEST_CASE("second_deriv_coeffs") {
    const auto c = second_deriv_coeffs(4, 2 * kPi);
    const std::vector<double> expected{0.0, -1.0, -4.0, -1.0};
    for (int s = 0; s < 4; ++s) CHECK(c[s] == doctest::Approx(expected[s]).epsilon(1e-14));
    const auto c_half = second_deriv_coeffs(4, kPi);
    for (int s = 0; s < 4; ++s) CHECK(c_half[s] == doctest::Approx(4.0 * expected[s]).epsilon(1e-14));
    for (int n : {2, 8, 30}) {
        const auto cn = second_deriv_coeffs(n, 3.7);
        CHECK(cn[0] == 0.0);
        for (double x : cn) CHECK(x <= 0.0);
    }
    CHECK_THROWS_AS(second_deriv_coeffs(5, 1.0), Error);
    CHECK_THROWS_AS(second_deriv_coeffs(4, 0.0), Error);
    const auto c1 = first_deriv_coeffs(4, 2 * kPi);
    CHECK(c1[1] == std::complex<double>(0.0, 1.0));
    CHECK(c1[2] == std::complex<double>(0.0, 0.0));
    CHECK(c1[3] == std::complex<double>(0.0, -1.0));
}

TEST_CASE("spectral_derivative2") {
    SUBCASE("constant weights") {
        const MovingGrid g = build_grid(v1(0.0), Mat::Identity(1, 1), 16, 3.0);
        CHECK(max_abs(spectral_derivative2(PMD{std::vector<double>(16, 3.0), g, false}, 0).weights) < 1e-13);
    }
    SUBCASE("exact on every resolved mode") {
        const int N = 64;
        const double L = 7.0;
        const MovingGrid g = periodic_grid(N, L);
        for (int s = 0; s < N / 2; ++s) {
            const double k = 2 * kPi * s / L;
            const PMD d = spectral_derivative2(sampled(g, [&](double x) { return std::cos(k * x); }), 0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                CHECK(std::abs(d.weights[i] + k * k * std::cos(k * g.point(i)[0])) < 1e-10 * std::max(1.0, k * k));
            }
        }
    }
    SUBCASE("Gaussian second derivative") {
        // the transform differentiates the periodic extension; the truncated Gaussian jumps by
        // its 1e-9 edge value there, so the full-grid comparison uses the periodized Gaussian
        const MovingGrid g = build_grid(v1(0.0), Mat::Identity(1, 1), 64, 6.0);
        const double L = g.extent(0);
        const auto periodized = [L](double (*f)(double), double x) {
            double sum = 0.0;
            for (int image = -3; image <= 3; ++image) sum += f(x + image * L);
            return sum;
        };
        double (*pdf)(double) = [](double x) { return normal_pdf(x, 0.0, 1.0); };
        double (*d2)(double) = [](double x) { return (x * x - 1.0) * normal_pdf(x, 0.0, 1.0); };

        const PMD d = spectral_derivative2(sampled(g, pdf), 0);
        const PMD dp = spectral_derivative2(sampled(g, [&](double x) { return periodized(pdf, x); }), 0);
        double err_periodic = 0.0, err_interior = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.point(i)[0];
            err_periodic = std::max(err_periodic, std::abs(dp.weights[i] - periodized(d2, x)));
            if (std::abs(x) <= 5.0) err_interior = std::max(err_interior, std::abs(d.weights[i] - d2(x)));
        }
        CHECK(err_periodic <= 1e-8);
        CHECK(err_interior <= 1e-8);
    }
    SUBCASE("acts along the requested axis only") {
        const double L = 4.0;
        const int N = 8;
        const double delta = L / N;
        const MovingGrid g(N, Vec::Constant(2, 0.5 * (N - 1) * delta), Mat::Identity(2, 2), Vec::Constant(2, delta));
        PMD p{std::vector<double>(g.size()), g, false};
        const double k = 2 * kPi / L;
        for (std::size_t i = 0; i < g.size(); ++i) p.weights[i] = std::cos(k * g.point(i)[1]);
        CHECK(max_abs(spectral_derivative2(p, 0).weights) < 1e-13);
        const PMD d1 = spectral_derivative2(p, 1);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(d1.weights[i] == doctest::Approx(-k * k * p.weights[i]).epsilon(1e-10));
    }
}

TEST_CASE("spectral_derivative1") {
    const int N = 32;
    const double L = 3.0;
    const MovingGrid g = periodic_grid(N, L);
    CHECK(max_abs(spectral_derivative1(PMD{std::vector<double>(N, 1.0), g, false}, 0).weights) < 1e-13);
    for (int s : {1, 4, 15}) {
        const double k = 2 * kPi * s / L;
        const PMD d = spectral_derivative1(sampled(g, [&](double x) { return std::sin(k * x); }), 0);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(d.weights[i] - k * std::cos(k * g.point(i)[0])) < 1e-10 * k);
    }
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PMD r{std::vector<double>(N), g, false};
    for (double& w : r.weights) w = u(rng);
    CHECK_NOTHROW(spectral_derivative1(r, 0));
}

TEST_CASE("psi_step") {
    WaveNumbers w;
    w.c2 = {{0.0, -4.0}};
    w.L = {kPi};
    const auto psi = psi_step(w, v1(1.0), 0.1);
    CHECK(psi[0] == 1.0);
    CHECK(psi[1] == doctest::Approx(1.0 / 1.2).epsilon(1e-15));
    const WaveNumbers w2 = wave_numbers(build_grid(Vec::Zero(2), Mat::Identity(2, 2), 8, 3.0));
    for (double x : psi_step(w2, Vec::Zero(2), 0.5)) CHECK(x == 1.0);
    const Vec q = (Vec(2) << 0.7, 1.3).finished();
    const auto p2 = psi_step(w2, q, 0.05);
    CHECK(p2[0] == 1.0);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double expected = 1.0 / (1.0 - 0.5 * w2.c2[0][i] * 0.7 * 0.05 - 0.5 * w2.c2[1][j] * 1.3 * 0.05);
            CHECK(p2[i * 8 + j] == doctest::Approx(expected).epsilon(1e-15));
            CHECK(p2[i * 8 + j] > 0.0);
            CHECK(p2[i * 8 + j] <= 1.0);
        }
    }
    CHECK_THROWS_AS(psi_step(w2, v1(1.0), 0.1), Error);
    CHECK_THROWS_AS(psi_step(w2, q, 0.0), Error);
}

TEST_CASE("spectral_predict") {
    SUBCASE("no dynamics is the identity") {
        const PMD p = gm_pmd(32);
        const PMD out = spectral_predict(p, scalar_model(0.0, 0.0), 1.0, 5);
        for (std::size_t i = 0; i < p.weights.size(); ++i) CHECK(out.weights[i] == doctest::Approx(p.weights[i]).epsilon(1e-12));
    }
    SUBCASE("heat kernel") {
        const MovingGrid g = build_grid(v1(0.0), Mat::Identity(1, 1), 64, 6.0);
        const PMD p = pmd_from_pdf([](const Vec& x) { return normal_pdf(x[0], 0.0, 1.0); }, g);
        const PMD out = spectral_predict(p, scalar_model(0.0, 1.0), 0.5, 4000);
        CHECK(moments(out).cov(0, 0) == doctest::Approx(1.5).epsilon(1e-3));
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(out.weights[i] - normal_pdf(g.point(i)[0], 0.0, 1.5)));
        CHECK(err <= 1e-4);
    }
    SUBCASE("more accurate than finite differences on a Gaussian mixture") {
        const PMD p = gm_pmd(80);
        const CtModel m = scalar_model(0.0, 1.0);
        const double e_spectral = gm_error(spectral_predict(p, m, 0.5, 4000), 0.5);
        const double e_fdm = gm_error(fdm_predict(p, m, 0.5, fdm_default_substeps(m, p.grid, 0.5)), 0.5);
        CHECK(e_spectral < e_fdm);
    }
    SUBCASE("equals the unclipped full-spectrum computation") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            Mat A = Mat::Zero(2, 2);
            A << u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5;
            const Vec q = (Vec(2) << u(rng), u(rng)).finished();
            const CtModel m(A, q.asDiagonal());
            const PMD p = pmd_from_pdf([](const Vec& x) { return normal_pdf(x[0], 0.0, 1.0) * normal_pdf(x[1], 0.0, 2.0); },
                                       build_grid(Vec::Zero(2), Vec((Vec(2) << 1.0, 2.0).finished()).asDiagonal(), 16, 5.0));
            const int l = 1 + static_cast<int>(u(rng) * 20);
            const SpectralPrediction raw = spectral_predict_raw(p, m, 0.7, l);
            PMD clipped = raw.raw;
            for (double& w : clipped.weights) w = std::max(0.0, w);
            const PMD expected = normalize(clipped);
            const PMD out = spectral_predict(p, m, 0.7, l);
            CHECK((out.grid.B() - raw.raw.grid.B()).norm() < 1e-14);
            for (std::size_t i = 0; i < out.weights.size(); ++i) {
                CHECK(std::abs(out.weights[i] - expected.weights[i]) < 1e-12 * max_abs(expected.weights));
            }
        }
    }
    SUBCASE("accumulated psi equals step-by-step application") {
        const PMD p = gm_pmd(32);
        const CtModel m = scalar_model(-0.3, 0.8);
        const int l = 7;
        const double tau = 1.4, dt = tau / l;
        const SpectralPrediction acc = spectral_predict_raw(p, m, tau, l);
        // apply one substep at a time, each with its own wave numbers
        FreqPMD f = dft_forward(p);
        MovingGrid g = p.grid;
        const Mat Phi = expm(m.A * dt);
        for (int step = 0; step < l; ++step) {
            const auto psi = psi_step(wave_numbers(g), m.Q.diagonal(), dt);
            for (std::size_t i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] *= psi[i] * (1.0 + dt * m.A.trace());
            g = g.moved(Phi);
        }
        f.grid = g;
        const PMD stepped = dft_inverse(f);
        for (std::size_t i = 0; i < stepped.weights.size(); ++i) {
            CHECK(std::abs(stepped.weights[i] - acc.raw.weights[i]) < 1e-12 * max_abs(acc.raw.weights));
        }
    }
    SUBCASE("conservation and contraction") {
        const PMD p = gm_pmd(40);
        Mat A(2, 2);
        A << 0.0, 1.0, -1.0, 0.0;
        const CtModel rot(A, Mat::Identity(2, 2));
        const MovingGrid g2 = build_grid(Vec::Zero(2), Mat::Identity(2, 2), 12, 4.0);
        const PMD p2 = pmd_from_pdf([](const Vec& x) { return normal_pdf(x[0], 0.0, 1.0) * normal_pdf(x[1], 0.0, 1.0); }, g2);
        const SpectralPrediction r = spectral_predict_raw(p2, rot, 2.0, 13);
        CHECK(r.trace_factor == 1.0);
        CHECK(r.psi[0] == 1.0);
        for (double x : r.psi) CHECK(std::abs(x) <= 1.0);
        CHECK(r.raw.mass() == doctest::Approx(p2.mass()).epsilon(1e-12));

        const CtModel decay = scalar_model(-0.2, 1.0);
        const SpectralPrediction d = spectral_predict_raw(p, decay, 1.0, 10);
        CHECK(d.trace_factor == doctest::Approx(std::pow(1.0 - 0.02, 10)).epsilon(1e-15));
        const FreqPMD f0 = dft_forward(p);
        const FreqPMD f1 = dft_forward(d.raw);
        CHECK(std::abs(f1.coeffs[0] - f0.coeffs[0] * d.trace_factor) < 1e-14);
    }
    SUBCASE("argument errors") {
        const MovingGrid g2 = build_grid(Vec::Zero(2), Mat::Identity(2, 2), 8, 3.0);
        const PMD p2 = normalize(PMD{std::vector<double>(64, 1.0), g2, false});
        Mat Q(2, 2);
        Q << 1.0, 0.5, 0.5, 1.0;
        try {
            (void)spectral_predict(p2, CtModel(Mat::Zero(2, 2), Q), 1.0, 4);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("diagonalize") != std::string::npos);
        }
        CHECK_THROWS_AS(spectral_predict(p2, CtModel(Mat::Zero(2, 2), Mat::Identity(2, 2)), 1.0, 0), Error);
        CHECK_THROWS_AS(spectral_predict(p2, CtModel(Mat::Zero(2, 2), Mat::Identity(2, 2)), 0.0, 4), Error);
        CHECK_THROWS_AS(spectral_predict(p2, scalar_model(0.0, 1.0), 1.0, 4), Error);
    }
}

TEST_CASE("spectral convergence on a Gaussian mixture") {
    // the local algebraic order log(e_i / e_{i+1}) / log(N_{i+1} / N_i) keeps growing:
    // no fixed power of 1/N bounds the decay
    const std::vector<int> ns{16, 20, 24, 28, 32, 40};
    const CtModel m = scalar_model(0.0, 1.0);
    std::vector<double> errors;
    for (int n : ns) errors.push_back(gm_error(spectral_predict(gm_pmd(n), m, 0.5, 20000), 0.5));
    double previous_order = 0.0;
    for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
        CHECK(errors[i + 1] < errors[i]);
        const double order = std::log(errors[i] / errors[i + 1]) / std::log(static_cast<double>(ns[i + 1]) / ns[i]);
        CHECK(order > previous_order);
        previous_order = order;
    }
    CHECK(previous_order > 8.0);
}
