#include "tps/marginal.hpp"

#include <cmath>
#include <string>

namespace tps {

KernelSmoother build_kernel(const Eigen::Ref<const Eigen::VectorXd>& x_data,
                            const Eigen::Ref<const Eigen::VectorXd>& x_test, double sigma_k) {
    if (!(sigma_k > 0.0)) throw ConfigError("build_kernel: sigma_k must be positive");
    if (x_data.size() == 0) throw ConfigError("build_kernel: empty data vector");

    KernelSmoother k;
    k.x_test = x_test;
    k.sigma_k = sigma_k;
    k.weights.resize(x_test.size(), x_data.size());
    for (Eigen::Index r = 0; r < x_test.size(); ++r) {
        // Unnormalized log-weights, shifted by the row maximum so the largest
        // weight is exactly 1; guards against whole-row underflow at tiny
        // bandwidths.
        Eigen::ArrayXd u = -0.5 * ((x_data.array() - x_test[r]) / sigma_k).square();
        u -= u.maxCoeff();
        Eigen::ArrayXd w = u.exp();
        k.weights.row(r) = (w / w.sum()).transpose();
    }
    return k;
}

Eigen::MatrixXd marginal_projection(const KernelSmoother& k, const DesignMatrix& d) {
    if (k.weights.cols() != d.values.rows())
        throw ShapeError("marginal_projection: K has " + std::to_string(k.weights.cols()) +
                         " columns but D has " + std::to_string(d.values.rows()) + " rows");
    return k.weights * d.values;
}

MarginalCurve estimate_marginal_logistic(const KernelSmoother& k,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta_hat) {
    if (k.weights.cols() != theta_hat.size())
        throw ShapeError("estimate_marginal_logistic: K/theta length mismatch");
    for (Eigen::Index i = 0; i < theta_hat.size(); ++i)
        if (!(theta_hat[i] > 0.0 && theta_hat[i] < 1.0))
            throw DomainError("estimate_marginal_logistic: probability outside (0,1)");
    MarginalCurve m;
    m.x_test = k.x_test;
    m.theta = k.weights * theta_hat;
    return m;
}

MarginalCurve true_marginal_oracle(const std::function<double(double, double)>& surface,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_test, int m_z) {
    if (m_z < 1) throw ConfigError("true_marginal_oracle: m_z must be at least 1");
    MarginalCurve m;
    m.x_test = x_test;
    m.theta.resize(x_test.size());
    for (Eigen::Index r = 0; r < x_test.size(); ++r) {
        double acc = 0.0;
        for (int i = 0; i < m_z; ++i) acc += surface(x_test[r], (i + 0.5) / m_z);
        m.theta[r] = acc / m_z;
    }
    return m;
}

}  // namespace tps
