#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Error raised for violated preconditions and numerical failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Continuous LTI model dx = A x dt + G dw with diffusion coefficient Q = G G^T.
struct CtModel {
    Mat A;
    Mat Q;

    CtModel() = default;
    CtModel(Mat drift, Mat diffusion);

    [[nodiscard]] int nx() const { return static_cast<int>(A.rows()); }
    [[nodiscard]] bool has_diagonal_diffusion() const;
};

/// Model rewritten in whitened coordinates xbar = G^-1 x, where the diffusion is the identity.
struct DiagonalizedModel {
    CtModel base;
    Mat G;
    Mat Abar;
};

struct DiscreteModel {
    Mat F;
    Mat Qd;
    double Ts = 0.0;
};

struct GaussianMixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;

    GaussianMixture() = default;
    GaussianMixture(std::vector<double> w, std::vector<double> mu, std::vector<double> var);

    [[nodiscard]] std::size_t size() const { return weights.size(); }
    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;
};

/// Scalar measurement z = h(x) + v with mixture-distributed v.
struct MeasModel {
    std::function<double(const Vec&)> h;
    GaussianMixture noise;
    int nz = 1;
};

DiagonalizedModel diagonalize(const CtModel& m);

/// How the covariance is mapped out of whitened coordinates.
enum class CovarianceMap {
    /// G cov G^-1
    Similarity,
    /// G cov G^T
    Congruence,
};

struct Moments {
    Vec mean;
    Mat cov;
};

Moments map_moments_back(const Vec& mean_bar, const Mat& cov_bar, const Mat& G,
                         CovarianceMap rule = CovarianceMap::Similarity);

/// Planar coordinated turn with known turn rate, state [px vx py vy].
CtModel coordinated_turn(double alpha);

/// Closed-form transition matrix of the coordinated turn over Ts.
Mat coordinated_turn_transition(double alpha, double Ts);

/// Exact discretization over Ts: F = exp(A Ts), Qd from the van Loan block exponential.
DiscreteModel discretize(const CtModel& m, double Ts);

/// Matrix exponential (Pade scaling and squaring).
Mat expm(const Mat& M);

double normal_pdf(double v, double mean, double variance);
double gm_pdf(const GaussianMixture& gm, double v);

/// Two-component altimeter noise: equal weights, means 0 and 20, unit variances.
GaussianMixture bridge_tunnel_noise();

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

}  // namespace pmf
