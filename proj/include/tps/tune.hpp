#ifndef TPS_TUNE_HPP
#define TPS_TUNE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tps/fit_logistic.hpp"
#include "tps/simulate.hpp"

namespace tps {

struct LambdaGrid {
    Eigen::VectorXd values;  // strictly increasing, non-negative

    void validate() const;
    // start:stop:step inclusive, e.g. 0..100 step 1.
    static LambdaGrid regular(double start, double stop, double step);
};

enum class CvMetric { SS, LogLik, Auc };
enum class Lambda2Rule { FiftyPercent, BestFit2 };

struct TracePoint {
    double lambda = 0.0;
    double value = 0.0;
    bool ok = true;
};

struct TuningReport {
    double lambda1a = 0.0;
    double lambda1b = 0.0;
    std::optional<double> lambda2;  // empty mirrors an NA selection
    std::vector<TracePoint> trace1a, trace2, trace1b;
};

// Truth-based sequential search (simulation mode): pick lambda1a minimizing
// Fit1 SS(fitted) against y_true; with lambda1b fixed there, pick lambda2
// minimizing Fit2 SS(fitted); then rescan lambda1b at the chosen lambda2.
// Ties break toward the smaller lambda.
TuningReport sequential_search(const FitContext& ctx, const LambdaGrid& grid1,
                               const LambdaGrid& grid2, int threads = 1);

struct CvResult {
    double lambda1 = 0.0;
    // One row per (grid point, fold): lambda, fold, metric value; NaN when the
    // fold failed to fit.
    std::vector<std::array<double, 3>> trace;
    std::vector<double> median_per_lambda;
};

// k-fold cross-validated lambda1 for the once-penalized logistic spline fit.
// Folds come from a seeded permutation; per-fold test metrics are compared by
// their median across folds (min SS, max LL, max AUC).
CvResult kfold_cv_lambda1(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
                          const PenaltyPair& penalty, const LambdaGrid& grid, int k,
                          CvMetric metric, std::uint64_t seed, int threads = 1);

struct Lambda2Selection {
    std::optional<double> lambda2;  // empty = NA (rule A found no qualifying value)
    std::vector<TracePoint> trace;  // marginal SS per grid value
    double fit1_marginal_ss = 0.0;
};

// lambda2 for the logistic Fit2 given a fixed lambda1 and a marginal target
// estimated from vertical data. Rule FiftyPercent returns the smallest grid
// value halving the Fit1 marginal SS; rule BestFit2 returns the arg-min.
Lambda2Selection select_lambda2(const DesignMatrix& d,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PenaltyPair& penalty, const KernelSmoother& kernel,
                                const Eigen::Ref<const Eigen::VectorXd>& theta_v,
                                double lambda1, const LambdaGrid& grid2, Lambda2Rule rule,
                                int threads = 1);

// Mann-Whitney AUC: P(score of a random positive > score of a random
// negative), ties counted one half.
double auc(const Eigen::Ref<const Eigen::VectorXd>& scores,
           const Eigen::Ref<const Eigen::VectorXd>& labels);

}  // namespace tps

#endif
