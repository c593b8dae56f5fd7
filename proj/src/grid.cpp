#include "pmf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmf {

MovingGrid::MovingGrid(int n_pa, Vec center, Mat B, Vec delta0)
    : n_pa_(n_pa), center_(std::move(center)), B_(std::move(B)), delta0_(std::move(delta0)) {
    const int n = nx();
    if (n == 0) throw Error("grid dimension must be positive");
    if (n_pa_ < 4 || n_pa_ % 2 != 0) throw Error("points per axis must be even and at least 4");
    if (B_.rows() != n || B_.cols() != n || delta0_.size() != n) {
        throw Error("grid placement dimensions do not match the center");
    }
    strides_.assign(n, 1);
    for (int m = n - 2; m >= 0; --m) strides_[m] = strides_[m + 1] * static_cast<std::size_t>(n_pa_);
    size_ = strides_[0] * static_cast<std::size_t>(n_pa_);
}

std::vector<int> MovingGrid::unravel(std::size_t flat) const {
    std::vector<int> idx(nx());
    for (int m = 0; m < nx(); ++m) {
        idx[m] = static_cast<int>(flat / strides_[m]);
        flat %= strides_[m];
    }
    return idx;
}

Vec MovingGrid::point(std::size_t flat) const {
    const auto idx = unravel(flat);
    Vec u(nx());
    for (int m = 0; m < nx(); ++m) u[m] = offset(idx[m]) * delta0_[m];
    return center_ + B_ * u;
}

Mat MovingGrid::points() const {
    const int n = nx();
    Mat U(n, static_cast<Eigen::Index>(size_));
    std::vector<int> idx(n, 0);
    for (std::size_t i = 0; i < size_; ++i) {
        for (int m = 0; m < n; ++m) U(m, static_cast<Eigen::Index>(i)) = offset(idx[m]) * delta0_[m];
        for (int m = n - 1; m >= 0; --m) {
            if (++idx[m] < n_pa_) break;
            idx[m] = 0;
        }
    }
    Mat X = B_ * U;
    X.colwise() += center_;
    return X;
}

double MovingGrid::cell_volume() const {
    return std::abs(B_.determinant()) * delta0_.prod();
}

double MovingGrid::spacing(int axis) const {
    return B_.col(axis).norm() * delta0_[axis];
}

Vec MovingGrid::to_index(const Vec& x) const {
    Vec u = B_.partialPivLu().solve(x - center_);
    for (int m = 0; m < nx(); ++m) u[m] = u[m] / delta0_[m] + 0.5 * (n_pa_ - 1);
    return u;
}

MovingGrid MovingGrid::moved(const Mat& Phi) const {
    MovingGrid g = *this;
    g.B_ = Phi * B_;
    g.center_ = Phi * center_;
    return g;
}

double PMD::mass() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0) * grid.cell_volume();
}

MovingGrid build_grid(const Vec& mean, const Mat& cov, int n_pa, double k_sigma) {
    const int n = static_cast<int>(mean.size());
    if (n_pa < 4 || n_pa % 2 != 0) throw Error("points per axis must be even and at least 4");
    if (!(k_sigma > 0.0)) throw Error("grid half-width in standard deviations must be positive");
    if (cov.rows() != n || cov.cols() != n) throw Error("covariance does not match the mean");
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw Error("grid covariance is not positive definite");
    Mat B = Mat::Zero(n, n);
    for (int m = 0; m < n; ++m) B(m, m) = 2.0 * k_sigma * std::sqrt(cov(m, m)) / n_pa;
    return MovingGrid(n_pa, mean, B, Vec::Ones(n));
}

MovingGrid advance_grid(const MovingGrid& g, const Mat& A, double dt) {
    if (!(dt > 0.0)) throw Error("grid advance step must be positive");
    return g.moved(expm(A * dt));
}

PMD pmd_from_pdf(const std::function<double(const Vec&)>& pdf, const MovingGrid& g) {
    PMD p{std::vector<double>(g.size()), g, false};
    const Mat X = g.points();
    for (std::size_t i = 0; i < g.size(); ++i) p.weights[i] = pdf(X.col(static_cast<Eigen::Index>(i)));
    if (std::all_of(p.weights.begin(), p.weights.end(), [](double w) { return w == 0.0; })) {
        throw Error("density not supported on grid");
    }
    return normalize(std::move(p));
}

PMD normalize(PMD p) {
    double sum = 0.0;
    for (double w : p.weights) {
        if (w < 0.0 || !std::isfinite(w)) throw Error("point-mass weights must be finite and nonnegative");
        sum += w;
    }
    if (sum == 0.0) throw Error("cannot normalize all-zero point-mass weights");
    const double scale = 1.0 / (sum * p.grid.cell_volume());
    for (double& w : p.weights) w *= scale;
    p.normalized = true;
    return p;
}

Moments moments(const PMD& p) {
    const int n = p.grid.nx();
    const Mat X = p.grid.points();
    const double vol = p.grid.cell_volume();
    Vec mean = Vec::Zero(n);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        mean += X.col(static_cast<Eigen::Index>(i)) * (p.weights[i] * vol);
    }
    Mat cov = Mat::Zero(n, n);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        const Vec d = X.col(static_cast<Eigen::Index>(i)) - mean;
        cov.noalias() += (p.weights[i] * vol) * d * d.transpose();
    }
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {mean, cov};
}

double eval_pmd(const PMD& p, const Vec& x) {
    const Vec u = p.grid.to_index(x);
    const int N = p.grid.n_pa();
    std::size_t flat = 0;
    for (int m = 0; m < p.grid.nx(); ++m) {
        // |u - j| <= 1/2 with ties resolved toward the lower index
        int j = static_cast<int>(std::ceil(u[m] - 0.5));
        if (j == -1 && u[m] >= -0.5) j = 0;
        if (j < 0 || j >= N) return 0.0;
        flat += static_cast<std::size_t>(j) * p.grid.stride(m);
    }
    return p.weights[flat];
}

PMD regrid(const PMD& p, const MovingGrid& g_new) {
    const MovingGrid& g_old = p.grid;
    const int n = g_old.nx();
    if (g_new.nx() != n) throw Error("regrid target has a different dimension");
    const int N = g_old.n_pa();

    // index coordinates of the new points in the old lattice: U = M X + c
    Mat M = g_old.B().inverse();
    for (int m = 0; m < n; ++m) M.row(m) /= g_old.delta0()[m];
    const Vec shift = Vec::Constant(n, 0.5 * (N - 1)) - M * g_old.center();
    const Mat U = (M * g_new.points()).colwise() + shift;

    PMD out{std::vector<double>(g_new.size(), 0.0), g_new, false};
    const std::size_t corners = std::size_t{1} << n;
    std::vector<int> base(n);
    std::vector<double> frac(n);
    for (std::size_t i = 0; i < g_new.size(); ++i) {
        bool outside = false;
        for (int m = 0; m < n; ++m) {
            const double u = U(m, static_cast<Eigen::Index>(i));
            if (!(u > -1.0 && u < N)) {
                outside = true;
                break;
            }
            const double fl = std::floor(u);
            base[m] = static_cast<int>(fl);
            frac[m] = u - fl;
        }
        if (outside) continue;
        double value = 0.0;
        for (std::size_t c = 0; c < corners; ++c) {
            double w = 1.0;
            std::size_t flat = 0;
            bool ghost = false;
            for (int m = 0; m < n; ++m) {
                const bool up = (c >> m) & 1U;
                const int j = base[m] + (up ? 1 : 0);
                if (j < 0 || j >= N) {
                    ghost = true;
                    break;
                }
                w *= up ? frac[m] : 1.0 - frac[m];
                flat += static_cast<std::size_t>(j) * g_old.stride(m);
            }
            if (!ghost) value += w * p.weights[flat];
        }
        out.weights[i] = value;
    }
    if (std::all_of(out.weights.begin(), out.weights.end(), [](double w) { return w == 0.0; })) {
        throw Error("regrid target lies outside the support of the density");
    }
    return normalize(std::move(out));
}

}  // namespace pmf
