#include "pmf/sine.hpp"

#include "pmf/fft.hpp"

#include <cmath>

namespace pmf {

std::vector<double> fdiff_eigvals(const TridiagSpec& spec) {
    std::vector<double> lambda(spec.N);
    for (int j = 1; j <= spec.N; ++j) {
        lambda[j - 1] = spec.b + 2.0 * spec.a * std::cos(j * kPi / (spec.N + 1));
    }
    return lambda;
}

Mat fdiff_eigvecs(int N) {
    if (N < 1) throw Error("eigenvector matrix size must be positive");
    Mat R(N, N);
    for (int i = 1; i <= N; ++i) {
        for (int j = 1; j <= N; ++j) R(i - 1, j - 1) = std::sin(i * j * kPi / (N + 1));
    }
    return R;
}

EigenSpec lambda_product(const CtModel& m, const MovingGrid& g, double /*t_k*/, int l, double dt) {
    if (m.nx() != 1 || g.nx() != 1) throw Error("per-axis eigenvalues need a one-dimensional model");
    if (l < 1) throw Error("step count must be positive");
    const int N = g.n_pa();
    const double phi = std::exp(m.A(0, 0) * dt);
    double delta = g.spacing(0);
    EigenSpec spec;
    spec.accumulated.assign(N, 1.0);
    for (int n = 0; n < l; ++n) {
        delta *= phi;
        auto step = fdiff_eigvals(make_tridiag_spec(m.Q(0, 0), dt, delta, m.A(0, 0), N));
        for (int j = 0; j < N; ++j) spec.accumulated[j] *= step[j];
        if (n == 0) spec.lambdas = std::move(step);
    }
    return spec;
}

std::vector<double> dst1(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    if (out.empty()) return out;
    const int dims[1] = {static_cast<int>(out.size())};
    fft::dst1(out, dims);
    return out;
}

std::vector<double> fst_predict(std::span<const double> weights, const EigenSpec& spec) {
    if (weights.size() != spec.accumulated.size()) throw Error("eigenvalue and weight lengths differ");
    auto coeffs = dst1(weights);
    for (std::size_t j = 0; j < coeffs.size(); ++j) coeffs[j] *= spec.accumulated[j];
    auto out = dst1(coeffs);
    const double scale = 2.0 / (static_cast<double>(out.size()) + 1.0);
    for (double& x : out) x *= scale;
    return out;
}

PMD sine_predict(const PMD& p, const CtModel& m, double tau, int l) {
    if (!m.has_diagonal_diffusion()) {
        throw Error("grid solvers need a diagonal diffusion matrix; diagonalize the model first");
    }
    if (m.nx() != p.grid.nx()) throw Error("model and grid dimensions differ");
    if (l < 1) throw Error("step count must be positive");
    if (!(tau > 0.0)) throw Error("prediction horizon must be positive");

    const int n = p.grid.nx();
    const int N = p.grid.n_pa();
    const double dt = tau / l;
    const double trace_a = m.A.trace();
    const Mat Phi = expm(m.A * dt);

    // 2 (cos theta_j - 1), shared by all axes
    std::vector<double> stencil_eig(N);
    for (int j = 0; j < N; ++j) stencil_eig[j] = 2.0 * (std::cos((j + 1) * kPi / (N + 1)) - 1.0);

    MovingGrid grid = p.grid;
    std::vector<double> accumulated(grid.size(), 1.0);
    std::vector<double> a(n);
    for (int step = 0; step < l; ++step) {
        grid = grid.moved(Phi);
        for (int axis = 0; axis < n; ++axis) {
            const double delta = grid.spacing(axis);
            a[axis] = m.Q(axis, axis) * dt / (2.0 * delta * delta);
        }
        std::vector<int> idx(n, 0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double lambda = 1.0 - dt * trace_a;
            for (int axis = 0; axis < n; ++axis) lambda += a[axis] * stencil_eig[idx[axis]];
            accumulated[i] *= lambda;
            for (int axis = n - 1; axis >= 0; --axis) {
                if (++idx[axis] < N) break;
                idx[axis] = 0;
            }
        }
    }

    std::vector<int> dims(n, N);
    std::vector<double> w = p.weights;
    fft::dst1(w, dims);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= accumulated[i];
    fft::dst1(w, dims);
    const double scale = std::pow(2.0 / (N + 1), n);
    // clip rounding residue below zero
    for (double& x : w) x = std::max(0.0, x * scale);
    return normalize(PMD{std::move(w), grid, false});
}

}  // namespace pmf
