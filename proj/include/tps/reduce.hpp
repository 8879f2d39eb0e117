#ifndef TPS_REDUCE_HPP
#define TPS_REDUCE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tps {

struct CovariateBlock {
    Eigen::MatrixXd values;  // [N x p_cov]
    std::vector<std::string> names;
};

enum class ReduceMethod { LinearPredictor, Pca };

struct ReducedVector {
    Eigen::VectorXd values;  // min-max rescaled to [0,1]
    ReduceMethod method = ReduceMethod::LinearPredictor;
    std::vector<std::string> dropped_columns;  // zero-variance columns (PCA)
};

// Rescales to [0,1]; identity when the input already spans [0,1].
Eigen::VectorXd rescale_unit(const Eigen::Ref<const Eigen::VectorXd>& v);

// Linear predictor on the link scale from an unpenalized logistic fit of the
// block (plus intercept) on y, then rescaled. Throws ReductionError when the
// fit does not converge or hits the separation guard.
ReducedVector glm_linear_predictor(const CovariateBlock& block,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);

// Scores on the leading eigenvector of the standardized covariance; sign fixed
// so the largest-magnitude loading is positive, then rescaled.
ReducedVector pca_first_component(const CovariateBlock& block);

struct TrimResult {
    Eigen::VectorXd x, z, y;  // surviving rows, x and z re-rescaled to [0,1]
    int removed = 0;
};

// Drops rows whose x or z fall outside the [lower_q, upper_q] empirical
// quantiles of their own vector.
TrimResult trim_extremes(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& z,
                         const Eigen::Ref<const Eigen::VectorXd>& y, double lower_q,
                         double upper_q);

}  // namespace tps

#endif
