#ifndef TPS_MARGINAL_HPP
#define TPS_MARGINAL_HPP

#include <functional>

#include <Eigen/Dense>

#include "tps/design.hpp"
#include "tps/errors.hpp"

namespace tps {

// Row-stochastic Gaussian kernel weights from data locations to test points.
struct KernelSmoother {
    Eigen::VectorXd x_test;   // [n0]
    double sigma_k = 0.05;
    Eigen::MatrixXd weights;  // [n0 x N], each row sums to 1
};

struct MarginalCurve {
    Eigen::VectorXd x_test;
    Eigen::VectorXd theta;
};

// K[r, i] proportional to phi((x_data[i] - x_test[r]) / sigma_k), rows
// normalized to sum 1. phi is the standard normal density.
KernelSmoother build_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_data,
                            const Eigen::Ref<const Eigen::VectorXd>& x_test, double sigma_k);

// W = K * D, so the fitted marginal at the test points is W * beta.
Eigen::MatrixXd marginal_projection(const KernelSmoother& k, const DesignMatrix& d);

// Kernel average of fitted probabilities; stays inside (0,1) by convexity.
MarginalCurve estimate_marginal_logistic(const KernelSmoother& k,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta_hat);

// Marginal of a bivariate surface under uniform z: averages surface(x0, z)
// over m_z equidistant midpoints (i + 0.5)/m_z on [0,1].
MarginalCurve true_marginal_oracle(const std::function<double(double, double)>& surface,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_test, int m_z);

}  // namespace tps

#endif
