#include "pmf/model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>

namespace pmf {

CtModel::CtModel(Mat drift, Mat diffusion) : A(std::move(drift)), Q(std::move(diffusion)) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw Error("drift matrix must be square and non-empty");
    }
    if (Q.rows() != A.rows() || Q.cols() != A.cols()) {
        throw Error("diffusion matrix must match the drift dimension");
    }
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error("diffusion matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw Error("diffusion matrix must be positive semidefinite");
    }
}

bool CtModel::has_diagonal_diffusion() const {
    for (int r = 0; r < Q.rows(); ++r) {
        for (int c = 0; c < Q.cols(); ++c) {
            if (r != c && Q(r, c) != 0.0) return false;
        }
    }
    return true;
}

GaussianMixture::GaussianMixture(std::vector<double> w, std::vector<double> mu,
                                 std::vector<double> var)
    : weights(std::move(w)), means(std::move(mu)), variances(std::move(var)) {
    if (weights.empty() || weights.size() != means.size() || weights.size() != variances.size()) {
        throw Error("mixture weights, means and variances must have equal non-zero length");
    }
    for (std::size_t g = 0; g < weights.size(); ++g) {
        if (!(weights[g] > 0.0)) throw Error("mixture weights must be positive");
        if (!(variances[g] > 0.0)) throw Error("mixture variances must be positive");
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw Error("mixture weights must sum to one");
}

double GaussianMixture::mean() const {
    double m = 0.0;
    for (std::size_t g = 0; g < size(); ++g) m += weights[g] * means[g];
    return m;
}

double GaussianMixture::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t g = 0; g < size(); ++g) {
        v += weights[g] * (variances[g] + (means[g] - m) * (means[g] - m));
    }
    return v;
}

DiagonalizedModel diagonalize(const CtModel& m) {
    const int n = m.nx();
    Mat G = Mat::Zero(n, n);
    if (m.has_diagonal_diffusion()) {
        for (int i = 0; i < n; ++i) {
            if (!(m.Q(i, i) > 0.0)) throw Error("diffusion not diagonalizable");
            G(i, i) = std::sqrt(m.Q(i, i));
        }
    } else {
        Eigen::LLT<Mat> llt(m.Q);
        if (llt.info() != Eigen::Success) throw Error("diffusion not diagonalizable");
        G = llt.matrixL();
        if (G.diagonal().minCoeff() <= 0.0) throw Error("diffusion not diagonalizable");
    }
    const Mat Ginv = G.inverse();
    Mat Abar = Ginv * m.A * G;
    return DiagonalizedModel{CtModel(Abar, Mat::Identity(n, n)), G, Abar};
}

Moments map_moments_back(const Vec& mean_bar, const Mat& cov_bar, const Mat& G, CovarianceMap rule) {
    if (G.rows() != G.cols() || G.cols() != mean_bar.size() || cov_bar.rows() != G.rows() ||
        cov_bar.cols() != G.cols()) {
        throw Error("inconsistent dimensions in moment back-mapping");
    }
    Eigen::FullPivLU<Mat> lu(G);
    if (!lu.isInvertible()) throw Error("singular transformation matrix");
    Moments out;
    out.mean = G * mean_bar;
    if (rule == CovarianceMap::Similarity) {
        out.cov = G * cov_bar * lu.inverse();
    } else {
        out.cov = G * cov_bar * G.transpose();
    }
    return out;
}

CtModel coordinated_turn(double alpha) {
    Mat A = Mat::Zero(4, 4);
    A(0, 1) = 1.0;
    A(1, 3) = -alpha;
    A(2, 3) = 1.0;
    A(3, 1) = alpha;
    // 4x2 noise input acting on the velocities
    Mat B = Mat::Zero(4, 2);
    B(1, 0) = 1.0;
    B(3, 1) = 1.0;
    return CtModel(A, B * B.transpose());
}

Mat coordinated_turn_transition(double alpha, double Ts) {
    const double s = std::sin(alpha * Ts);
    const double c = std::cos(alpha * Ts);
    // sin(aT)/a and (1-cos(aT))/a, with their a -> 0 limits
    const double sa = alpha == 0.0 ? Ts : s / alpha;
    const double ca = alpha == 0.0 ? 0.0 : (1.0 - c) / alpha;
    Mat F(4, 4);
    F << 1, sa, 0, -ca,
         0, c, 0, -s,
         0, ca, 1, sa,
         0, s, 0, c;
    return F;
}

Mat expm(const Mat& M) {
    return M.exp();
}

DiscreteModel discretize(const CtModel& m, double Ts) {
    if (!(Ts > 0.0)) throw Error("sampling period must be positive");
    const int n = m.nx();
    Mat block = Mat::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = -m.A * Ts;
    block.topRightCorner(n, n) = m.Q * Ts;
    block.bottomRightCorner(n, n) = m.A.transpose() * Ts;
    const Mat E = expm(block);
    DiscreteModel dm;
    dm.F = E.bottomRightCorner(n, n).transpose();
    dm.Qd = dm.F * E.topRightCorner(n, n);
    dm.Qd = 0.5 * (dm.Qd + dm.Qd.transpose()).eval();
    dm.Ts = Ts;
    return dm;
}

double normal_pdf(double v, double mean, double variance) {
    const double d = v - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * kPi * variance);
}

double gm_pdf(const GaussianMixture& gm, double v) {
    double p = 0.0;
    for (std::size_t g = 0; g < gm.size(); ++g) {
        p += gm.weights[g] * normal_pdf(v, gm.means[g], gm.variances[g]);
    }
    return p;
}

GaussianMixture bridge_tunnel_noise() {
    return GaussianMixture({0.5, 0.5}, {0.0, 20.0}, {1.0, 1.0});
}

}  // namespace pmf
