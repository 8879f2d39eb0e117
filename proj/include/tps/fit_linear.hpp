#ifndef TPS_FIT_LINEAR_HPP
#define TPS_FIT_LINEAR_HPP

#include <Eigen/Dense>

#include "tps/design.hpp"
#include "tps/marginal.hpp"

namespace tps {

enum class ModelId { Fit0, Fit1, Fit2 };

struct LinearFit {
    ModelId model_id = ModelId::Fit0;
    Eigen::VectorXd beta;
    Eigen::VectorXd fitted;  // D * beta
    MarginalCurve marginal;  // filled by attach_marginal
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

// Ordinary least squares: beta minimizes (y - D beta)'(y - D beta).
LinearFit fit0(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y);

// P-spline estimate: adds lambda1 * beta' (P1'P1 + P2'P2) beta.
LinearFit fit1(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
               const PenaltyPair& p, double lambda1);

// Twice-penalized estimate: adds lambda2 * |W beta - theta_target|^2 on top of
// the roughness penalty, pulling the fitted marginal towards the target.
LinearFit fit2(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
               const PenaltyPair& p, const Eigen::Ref<const Eigen::MatrixXd>& w,
               const MarginalCurve& theta_target, double lambda1, double lambda2);

// Computes the fitted marginal K * fitted (equal to W beta) and stores it on
// the fit.
void attach_marginal(LinearFit& fit, const KernelSmoother& k);

}  // namespace tps

#endif
