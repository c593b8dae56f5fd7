#pragma once

#include "pmf/grid.hpp"
#include "pmf/model.hpp"

#include <complex>
#include <vector>

namespace pmf {

/// Point-mass weights in the frequency domain, zero frequency first on every axis.
struct FreqPMD {
    std::vector<std::complex<double>> coeffs;
    MovingGrid grid;
};

/// Second-derivative multipliers of every axis of a grid.
struct WaveNumbers {
    std::vector<std::vector<double>> c2;
    std::vector<double> L;
};

/// Per-axis DFT carrying the 1/N factor; the inverse carries none.
FreqPMD dft_forward(const PMD& p);

/// Inverse per-axis DFT.  Imaginary residue above 1e-10 of the largest magnitude is an error.
PMD dft_inverse(const FreqPMD& f);

/// c2[s] = -((2 pi / L) k_s)^2 with k = 0, 1, ..., N/2 - 1, -N/2, ..., -1.
std::vector<double> second_deriv_coeffs(int n_pa, double L);

/// i 2 pi k_s / L with the Nyquist entry set to zero.
std::vector<std::complex<double>> first_deriv_coeffs(int n_pa, double L);

/// Multipliers for the current extent of every axis of g.
WaveNumbers wave_numbers(const MovingGrid& g);

PMD spectral_derivative2(const PMD& p, int axis);
PMD spectral_derivative1(const PMD& p, int axis);

/// psi = 1 / (1 - 0.5 sum_m c2_m Q_mm dt) over the full frequency tensor.
std::vector<double> psi_step(const WaveNumbers& w, const Vec& q_diag, double dt);

/// Everything a prediction produces before the final normalization.
struct SpectralPrediction {
    /// Accumulated product of psi over the l steps.
    std::vector<double> psi;
    /// (1 + dt trace(A))^l
    double trace_factor = 1.0;
    /// Unnormalized predicted weights on the advanced grid.
    PMD raw;
};

SpectralPrediction spectral_predict_raw(const PMD& p, const CtModel& m, double tau, int l);

/// Semi-implicit Euler solution over tau with l substeps: one forward transform,
/// accumulated psi, one inverse transform, normalize.
PMD spectral_predict(const PMD& p, const CtModel& m, double tau, int l);

}  // namespace pmf
