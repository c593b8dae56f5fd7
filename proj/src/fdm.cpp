#include "pmf/fdm.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pmf {
namespace {

void require_diagonal(const CtModel& m) {
    if (!m.has_diagonal_diffusion()) {
        throw Error("grid solvers need a diagonal diffusion matrix; diagonalize the model first");
    }
}

// Explicit stencil on the current grid, without any stability check.
std::vector<double> apply_stencil(const std::vector<double>& w, const MovingGrid& g,
                                  const CtModel& m, double dt) {
    const double trace_a = m.A.trace();
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = (1.0 - dt * trace_a) * w[i];
    const int N = g.n_pa();
    for (int axis = 0; axis < g.nx(); ++axis) {
        const double q = m.Q(axis, axis);
        if (q == 0.0) continue;
        const double delta = g.spacing(axis);
        const double a = q * dt / (2.0 * delta * delta);
        const std::size_t stride = g.stride(axis);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto j = static_cast<int>((i / stride) % static_cast<std::size_t>(N));
            const double lo = j > 0 ? w[i - stride] : 0.0;
            const double hi = j < N - 1 ? w[i + stride] : 0.0;
            out[i] += a * (hi - 2.0 * w[i] + lo);
        }
    }
    return out;
}

}  // namespace

TridiagSpec make_tridiag_spec(double q, double dt, double delta, double trace_a, int N) {
    if (N < 1) throw Error("tridiagonal size must be positive");
    TridiagSpec s;
    s.a = q * dt / (2.0 * delta * delta);
    s.b = 1.0 - q * dt / (delta * delta) - dt * trace_a;
    s.N = N;
    return s;
}

double fdm_max_stable_dt(const CtModel& m, const MovingGrid& g) {
    require_diagonal(m);
    double rate = m.A.trace();
    for (int axis = 0; axis < g.nx(); ++axis) {
        const double delta = g.spacing(axis);
        rate += m.Q(axis, axis) / (delta * delta);
    }
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

int fdm_default_substeps(const CtModel& m, const MovingGrid& g, double tau) {
    if (!(tau > 0.0)) throw Error("prediction horizon must be positive");
    constexpr int kSamples = 8;
    double dt_max = fdm_max_stable_dt(m, g);
    const Mat Phi = expm(m.A * (tau / kSamples));
    MovingGrid probe = g;
    for (int s = 0; s < kSamples; ++s) {
        probe = probe.moved(Phi);
        dt_max = std::min(dt_max, fdm_max_stable_dt(m, probe));
    }
    if (!std::isfinite(dt_max)) return 1;
    return std::max(1, static_cast<int>(std::ceil(tau / (0.5 * dt_max) - 1e-12)));
}

PMD fdm_step(const PMD& p, const CtModel& m, double dt) {
    require_diagonal(m);
    if (m.nx() != p.grid.nx()) throw Error("model and grid dimensions differ");
    if (!(dt > 0.0)) throw Error("time step must be positive");
    const double dt_max = fdm_max_stable_dt(m, p.grid);
    if (dt > dt_max) {
        int worst = 0;
        double worst_rate = -1.0;
        for (int axis = 0; axis < p.grid.nx(); ++axis) {
            const double delta = p.grid.spacing(axis);
            const double rate = m.Q(axis, axis) / (delta * delta);
            if (rate > worst_rate) {
                worst_rate = rate;
                worst = axis;
            }
        }
        std::ostringstream msg;
        msg.precision(17);
        msg << "explicit step unstable along axis " << worst << ": dt = " << dt
            << " exceeds the admissible " << dt_max;
        throw Error(msg.str());
    }
    return PMD{apply_stencil(p.weights, p.grid, m, dt), p.grid, false};
}

Mat build_fdiff(const TridiagSpec& spec) {
    if (spec.N < 1) throw Error("tridiagonal size must be positive");
    Mat F = Mat::Zero(spec.N, spec.N);
    for (int i = 0; i < spec.N; ++i) {
        F(i, i) = spec.b;
        if (i + 1 < spec.N) {
            F(i, i + 1) = spec.a;
            F(i + 1, i) = spec.a;
        }
    }
    return F;
}

Mat tpm_product(const CtModel& m, const MovingGrid& g, double /*t_k*/, int l, double dt) {
    if (m.nx() != 1 || g.nx() != 1) throw Error("the dense transition product is one-dimensional");
    if (l < 1) throw Error("step count must be positive");
    const int N = g.n_pa();
    const double phi = std::exp(m.A(0, 0) * dt);
    double delta = g.spacing(0);
    Mat T = Mat::Identity(N, N);
    for (int n = 0; n < l; ++n) {
        delta *= phi;
        T = build_fdiff(make_tridiag_spec(m.Q(0, 0), dt, delta, m.A(0, 0), N)) * T;
    }
    return T;
}

PMD fdm_predict(const PMD& p, const CtModel& m, double tau, int l) {
    if (l < 1) throw Error("step count must be positive");
    if (!(tau > 0.0)) throw Error("prediction horizon must be positive");
    const double dt = tau / l;
    const Mat Phi = expm(m.A * dt);
    PMD cur = p;
    for (int n = 0; n < l; ++n) {
        cur.grid = cur.grid.moved(Phi);
        cur = fdm_step(cur, m, dt);
    }
    return normalize(std::move(cur));
}

}  // namespace pmf
