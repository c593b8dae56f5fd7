#include "pmf/spectral.hpp"

#include "pmf/fft.hpp"

#include <cmath>

namespace pmf {
namespace {

using Complex = std::complex<double>;

std::vector<int> tensor_dims(const MovingGrid& g) { return std::vector<int>(g.nx(), g.n_pa()); }

// Signed frequency index of DFT output position s (zero frequency first).
int frequency(int s, int n_pa) { return s < n_pa / 2 ? s : s - n_pa; }

void require_even(int n_pa) {
    if (n_pa % 2 != 0) throw Error("spectral differentiation needs an even number of points per axis");
}

template <typename Multiplier>
PMD apply_along_axis(const PMD& p, int axis, const std::vector<Multiplier>& mult) {
    FreqPMD f = dft_forward(p);
    const int N = p.grid.n_pa();
    const std::size_t stride = p.grid.stride(axis);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        f.coeffs[i] *= mult[(i / stride) % static_cast<std::size_t>(N)];
    }
    PMD out = dft_inverse(f);
    out.normalized = false;
    return out;
}

}  // namespace

FreqPMD dft_forward(const PMD& p) {
    require_even(p.grid.n_pa());
    FreqPMD f{std::vector<Complex>(p.weights.begin(), p.weights.end()), p.grid};
    const auto dims = tensor_dims(p.grid);
    fft::dft(f.coeffs, dims, -1);
    const double scale = 1.0 / static_cast<double>(p.grid.size());
    for (auto& c : f.coeffs) c *= scale;
    return f;
}

PMD dft_inverse(const FreqPMD& f) {
    std::vector<Complex> data = f.coeffs;
    const auto dims = tensor_dims(f.grid);
    fft::dft(data, dims, +1);
    double largest = 0.0;
    double residue = 0.0;
    for (const auto& c : data) {
        largest = std::max(largest, std::abs(c));
        residue = std::max(residue, std::abs(c.imag()));
    }
    if (residue > 1e-10 * largest) {
        throw Error("inverse transform is not real: spectrum lost its conjugate symmetry");
    }
    PMD p{std::vector<double>(data.size()), f.grid, false};
    for (std::size_t i = 0; i < data.size(); ++i) p.weights[i] = data[i].real();
    return p;
}

std::vector<double> second_deriv_coeffs(int n_pa, double L) {
    require_even(n_pa);
    if (!(L > 0.0)) throw Error("grid extent must be positive");
    std::vector<double> c2(n_pa);
    for (int s = 0; s < n_pa; ++s) {
        const double k = 2.0 * kPi / L * frequency(s, n_pa);
        c2[s] = -k * k;
    }
    return c2;
}

std::vector<std::complex<double>> first_deriv_coeffs(int n_pa, double L) {
    require_even(n_pa);
    if (!(L > 0.0)) throw Error("grid extent must be positive");
    std::vector<Complex> c1(n_pa);
    for (int s = 0; s < n_pa; ++s) {
        c1[s] = s == n_pa / 2 ? Complex{} : Complex{0.0, 2.0 * kPi / L * frequency(s, n_pa)};
    }
    return c1;
}

WaveNumbers wave_numbers(const MovingGrid& g) {
    WaveNumbers w;
    for (int axis = 0; axis < g.nx(); ++axis) {
        w.L.push_back(g.extent(axis));
        w.c2.push_back(second_deriv_coeffs(g.n_pa(), w.L.back()));
    }
    return w;
}

PMD spectral_derivative2(const PMD& p, int axis) {
    return apply_along_axis(p, axis, second_deriv_coeffs(p.grid.n_pa(), p.grid.extent(axis)));
}

PMD spectral_derivative1(const PMD& p, int axis) {
    return apply_along_axis(p, axis, first_deriv_coeffs(p.grid.n_pa(), p.grid.extent(axis)));
}

std::vector<double> psi_step(const WaveNumbers& w, const Vec& q_diag, double dt) {
    const int n = static_cast<int>(w.c2.size());
    if (q_diag.size() != n) throw Error("diffusion diagonal does not match the wave numbers");
    if (!(dt > 0.0)) throw Error("time step must be positive");
    std::size_t total = 1;
    for (const auto& c : w.c2) total *= c.size();
    // per-axis contributions -0.5 c2 q dt, summed across axes
    std::vector<std::vector<double>> terms(n);
    for (int m = 0; m < n; ++m) {
        terms[m].resize(w.c2[m].size());
        for (std::size_t s = 0; s < w.c2[m].size(); ++s) terms[m][s] = -0.5 * w.c2[m][s] * q_diag[m] * dt;
    }
    std::vector<double> psi(total);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t i = 0; i < total; ++i) {
        double denom = 1.0;
        for (int m = 0; m < n; ++m) denom += terms[m][idx[m]];
        psi[i] = 1.0 / denom;
        for (int m = n - 1; m >= 0; --m) {
            if (++idx[m] < w.c2[m].size()) break;
            idx[m] = 0;
        }
    }
    return psi;
}

namespace {

void check_prediction_args(const PMD& p, const CtModel& m, double tau, int l) {
    if (!m.has_diagonal_diffusion()) {
        throw Error("spectral prediction needs a diagonal diffusion matrix; diagonalize the model first");
    }
    if (m.nx() != p.grid.nx()) throw Error("model and grid dimensions differ");
    require_even(p.grid.n_pa());
    if (l < 1) throw Error("step count must be positive");
    if (!(tau > 0.0)) throw Error("prediction horizon must be positive");
}

// Accumulated product of the psi denominators on the half spectrum of a real tensor
// (last axis holds frequencies 0..N/2); the grid is advanced l times along the way.
std::vector<double> half_denominators(MovingGrid& grid, const CtModel& m, double dt, int l) {
    const int n = grid.nx();
    const int N = grid.n_pa();
    const int last = N / 2 + 1;
    const Mat Phi = expm(m.A * dt);
    const auto dims = tensor_dims(grid);
    std::vector<double> denom(fft::half_size(dims), 1.0);
    std::vector<std::vector<double>> terms(n);
    std::vector<int> extent(n, N);
    extent[n - 1] = last;
    for (int step = 0; step < l; ++step) {
        for (int axis = 0; axis < n; ++axis) {
            const auto c2 = second_deriv_coeffs(N, grid.extent(axis));
            terms[axis].resize(extent[axis]);
            for (int s = 0; s < extent[axis]; ++s) terms[axis][s] = -0.5 * c2[s] * m.Q(axis, axis) * dt;
        }
        std::vector<int> idx(n, 0);
        for (double& d : denom) {
            double sum = 1.0;
            for (int axis = 0; axis < n; ++axis) sum += terms[axis][idx[axis]];
            d *= sum;
            for (int axis = n - 1; axis >= 0; --axis) {
                if (++idx[axis] < extent[axis]) break;
                idx[axis] = 0;
            }
        }
        grid = grid.moved(Phi);
    }
    return denom;
}

}  // namespace

SpectralPrediction spectral_predict_raw(const PMD& p, const CtModel& m, double tau, int l) {
    check_prediction_args(p, m, tau, l);
    const double dt = tau / l;
    const Mat Phi = expm(m.A * dt);
    const Vec q = m.Q.diagonal();

    FreqPMD f = dft_forward(p);
    SpectralPrediction out;
    out.psi.assign(p.grid.size(), 1.0);
    MovingGrid grid = p.grid;
    for (int step = 0; step < l; ++step) {
        const auto psi = psi_step(wave_numbers(grid), q, dt);
        for (std::size_t i = 0; i < psi.size(); ++i) out.psi[i] *= psi[i];
        grid = grid.moved(Phi);
    }
    out.trace_factor = std::pow(1.0 + dt * m.A.trace(), l);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] *= out.psi[i] * out.trace_factor;
    f.grid = grid;
    out.raw = dft_inverse(f);
    return out;
}

PMD spectral_predict(const PMD& p, const CtModel& m, double tau, int l) {
    check_prediction_args(p, m, tau, l);
    const double dt = tau / l;
    // same arithmetic as spectral_predict_raw, on the half spectrum of the real weights
    MovingGrid grid = p.grid;
    const auto denom = half_denominators(grid, m, dt, l);
    const auto dims = tensor_dims(p.grid);
    auto half = fft::rdft(p.weights, dims);
    const double scale = std::pow(1.0 + dt * m.A.trace(), l) / static_cast<double>(p.grid.size());
    for (std::size_t i = 0; i < half.size(); ++i) half[i] *= scale / denom[i];
    PMD out{fft::irdft(half, dims), grid, false};
    // the trigonometric interpolant may undershoot near zero
    for (double& w : out.weights) w = std::max(0.0, w);
    return normalize(std::move(out));
}

}  // namespace pmf
