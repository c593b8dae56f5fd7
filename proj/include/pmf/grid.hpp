#pragma once

#include "pmf/model.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace pmf {

/// Equidistant lattice whose physical placement follows the deterministic flow.
///
/// Computational index (j_1, ..., j_n) maps to the physical point
/// center + B * [offset(j_1) delta0_1, ..., offset(j_n) delta0_n]^T with
/// offset(j) = j - (N_pa - 1) / 2.  Weight tensors are stored row-major,
/// axis 0 varying slowest.
class MovingGrid {
public:
    MovingGrid() = default;
    MovingGrid(int n_pa, Vec center, Mat B, Vec delta0);

    [[nodiscard]] int nx() const { return static_cast<int>(center_.size()); }
    [[nodiscard]] int n_pa() const { return n_pa_; }
    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] const Vec& center() const { return center_; }
    [[nodiscard]] const Mat& B() const { return B_; }
    [[nodiscard]] const Vec& delta0() const { return delta0_; }

    /// Canonical coordinate of index j along an axis, before scaling.
    [[nodiscard]] double offset(int j) const { return j - 0.5 * (n_pa_ - 1); }
    /// Stride of an axis in the flat tensor.
    [[nodiscard]] std::size_t stride(int axis) const { return strides_[axis]; }
    [[nodiscard]] std::vector<int> unravel(std::size_t flat) const;
    [[nodiscard]] Vec point(std::size_t flat) const;
    /// All physical points as columns (nx x size).
    [[nodiscard]] Mat points() const;

    /// Volume of one cell, |det B| * prod(delta0).
    [[nodiscard]] double cell_volume() const;
    /// Physical spacing along the m-th grid axis (column length of B diag(delta0)).
    [[nodiscard]] double spacing(int axis) const;
    /// Physical extent N_pa * spacing along the m-th grid axis.
    [[nodiscard]] double extent(int axis) const { return n_pa_ * spacing(axis); }

    /// Computational (fractional index) coordinates of a physical point.
    [[nodiscard]] Vec to_index(const Vec& x) const;

    /// Returns a copy advanced by a precomputed flow map Phi = exp(A dt).
    [[nodiscard]] MovingGrid moved(const Mat& Phi) const;

private:
    int n_pa_ = 0;
    std::size_t size_ = 0;
    Vec center_;
    Mat B_;
    Vec delta0_;
    std::vector<std::size_t> strides_;
};

/// Piece-wise constant point-mass density.
struct PMD {
    std::vector<double> weights;
    MovingGrid grid;
    bool normalized = false;

    [[nodiscard]] double mass() const;
};

MovingGrid build_grid(const Vec& mean, const Mat& cov, int n_pa, double k_sigma);

/// B <- exp(A dt) B and center <- exp(A dt) center.
MovingGrid advance_grid(const MovingGrid& g, const Mat& A, double dt);

PMD pmd_from_pdf(const std::function<double(const Vec&)>& pdf, const MovingGrid& g);
PMD normalize(PMD p);
Moments moments(const PMD& p);
double eval_pmd(const PMD& p, const Vec& x);

/// Multilinear interpolation of p onto g_new, zero outside the old support, then normalize.
PMD regrid(const PMD& p, const MovingGrid& g_new);

}  // namespace pmf
