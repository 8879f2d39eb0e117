#include "tps/fit_linear.hpp"

#include "tps/errors.hpp"
#include "tps/linalg.hpp"

namespace tps {

namespace {

void check_response(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (d.values.rows() != y.size())
        throw ShapeError("fit: design has " + std::to_string(d.values.rows()) +
                         " rows but y has " + std::to_string(y.size()));
}

}  // namespace

LinearFit fit0(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y) {
    check_response(d, y);
    LinearFit f;
    f.model_id = ModelId::Fit0;
    f.beta = solve_symmetric(d.values.transpose() * d.values, d.values.transpose() * y);
    f.fitted = d.values * f.beta;
    return f;
}

LinearFit fit1(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
               const PenaltyPair& p, double lambda1) {
    check_response(d, y);
    if (lambda1 < 0.0) throw ConfigError("fit1: lambda1 must be non-negative");
    if (p.p1.cols() != d.values.cols())
        throw ShapeError("fit1: penalty not conformable with design");

    Eigen::MatrixXd a = d.values.transpose() * d.values;
    if (lambda1 > 0.0) a += lambda1 * p.penalty_gram();

    LinearFit f;
    f.model_id = ModelId::Fit1;
    f.lambda1 = lambda1;
    f.beta = solve_symmetric(a, d.values.transpose() * y);
    f.fitted = d.values * f.beta;
    return f;
}

LinearFit fit2(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
               const PenaltyPair& p, const Eigen::Ref<const Eigen::MatrixXd>& w,
               const MarginalCurve& theta_target, double lambda1, double lambda2) {
    check_response(d, y);
    if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("fit2: lambdas must be non-negative");
    if (w.cols() != d.values.cols()) throw ShapeError("fit2: W not conformable with design");
    if (w.rows() != theta_target.theta.size())
        throw ShapeError("fit2: W has " + std::to_string(w.rows()) + " rows but target has " +
                         std::to_string(theta_target.theta.size()) + " values");

    Eigen::MatrixXd a = d.values.transpose() * d.values;
    if (lambda1 > 0.0) a += lambda1 * p.penalty_gram();
    Eigen::VectorXd b = d.values.transpose() * y;
    if (lambda2 > 0.0) {
        a += lambda2 * (w.transpose() * w);
        b += lambda2 * (w.transpose() * theta_target.theta);
    }

    LinearFit f;
    f.model_id = ModelId::Fit2;
    f.lambda1 = lambda1;
    f.lambda2 = lambda2;
    f.beta = solve_symmetric(a, b);
    f.fitted = d.values * f.beta;
    return f;
}

void attach_marginal(LinearFit& fit, const KernelSmoother& k) {
    if (k.weights.cols() != fit.fitted.size())
        throw ShapeError("attach_marginal: K not conformable with fitted values");
    fit.marginal.x_test = k.x_test;
    fit.marginal.theta = k.weights * fit.fitted;
}

}  // namespace tps
