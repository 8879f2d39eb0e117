#include "tps/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tps/errors.hpp"
#include "tps/util.hpp"

namespace tps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Index of the best finite trace value; ascending scan keeps ties at the
// smaller lambda.
int select_index(const std::vector<TracePoint>& trace, bool minimize) {
    int best = -1;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!trace[i].ok || !std::isfinite(trace[i].value)) continue;
        if (best < 0 || (minimize ? trace[i].value < trace[best].value
                                  : trace[i].value > trace[best].value))
            best = static_cast<int>(i);
    }
    if (best < 0) throw TuningError("tuning: every grid point failed to fit");
    return best;
}

std::vector<TracePoint> scan_grid(const LambdaGrid& grid, int threads,
                                  const std::function<double(double)>& objective) {
    std::vector<TracePoint> trace(grid.values.size());
    parallel_for(static_cast<int>(grid.values.size()), threads, [&](int i) {
        trace[i].lambda = grid.values[i];
        try {
            trace[i].value = objective(grid.values[i]);
            trace[i].ok = std::isfinite(trace[i].value);
        } catch (const std::exception&) {
            trace[i].value = kNaN;
            trace[i].ok = false;
        }
    });
    return trace;
}

}  // namespace

void LambdaGrid::validate() const {
    if (values.size() == 0) throw ConfigError("LambdaGrid: empty grid");
    if (values[0] < 0.0) throw ConfigError("LambdaGrid: negative lambda");
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw ConfigError("LambdaGrid: values must be strictly increasing");
}

LambdaGrid LambdaGrid::regular(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw ConfigError("LambdaGrid: bad range");
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    LambdaGrid g;
    g.values.resize(n);
    for (int i = 0; i < n; ++i) g.values[i] = start + i * step;
    g.validate();
    return g;
}

TuningReport sequential_search(const FitContext& ctx, const LambdaGrid& grid1,
                               const LambdaGrid& grid2, int threads) {
    grid1.validate();
    grid2.validate();
    if (ctx.data.y_true.size() == 0)
        throw TuningError("sequential_search: needs y_true (simulation mode only)");
    const Eigen::VectorXd& y_true = ctx.data.y_true;

    TuningReport report;
    report.trace1a = scan_grid(grid1, threads, [&](double lambda) {
        return ss_fitted(fit1(ctx.design, ctx.data.y, ctx.penalty, lambda).fitted, y_true);
    });
    report.lambda1a = report.trace1a[select_index(report.trace1a, true)].lambda;

    const double lambda1_fixed = report.lambda1a;
    report.trace2 = scan_grid(grid2, threads, [&](double lambda) {
        return ss_fitted(fit2(ctx.design, ctx.data.y, ctx.penalty, ctx.w,
                              ctx.data.theta_true_marginal, lambda1_fixed, lambda)
                             .fitted,
                         y_true);
    });
    const double lambda2 = report.trace2[select_index(report.trace2, true)].lambda;
    report.lambda2 = lambda2;

    report.trace1b = scan_grid(grid1, threads, [&](double lambda) {
        return ss_fitted(fit2(ctx.design, ctx.data.y, ctx.penalty, ctx.w,
                              ctx.data.theta_true_marginal, lambda, lambda2)
                             .fitted,
                         y_true);
    });
    report.lambda1b = report.trace1b[select_index(report.trace1b, true)].lambda;
    return report;
}

CvResult kfold_cv_lambda1(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
                          const PenaltyPair& penalty, const LambdaGrid& grid, int k,
                          CvMetric metric, std::uint64_t seed, int threads) {
    grid.validate();
    const int n = static_cast<int>(d.values.rows());
    if (k < 2) throw ConfigError("kfold_cv_lambda1: k must be at least 2");
    if (n < k) throw ConfigError("kfold_cv_lambda1: fewer rows than folds");
    if (y.size() != n) throw ShapeError("kfold_cv_lambda1: y length mismatch");

    // Seeded permutation, folds round-robin over the permuted order.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<int>> test_rows(k), train_rows(k);
    for (int j = 0; j < n; ++j) test_rows[j % k].push_back(perm[j]);
    for (int f = 0; f < k; ++f) {
        std::vector<bool> in_test(n, false);
        for (int row : test_rows[f]) in_test[row] = true;
        for (int row = 0; row < n; ++row)
            if (!in_test[row]) train_rows[f].push_back(row);
    }

    const int n_lambda = static_cast<int>(grid.values.size());
    Eigen::MatrixXd fold_values = Eigen::MatrixXd::Constant(n_lambda, k, kNaN);
    parallel_for(n_lambda * k, threads, [&](int job) {
        const int li = job / k;
        const int f = job % k;
        try {
            DesignMatrix d_train = subset_rows(d, train_rows[f]);
            Eigen::VectorXd y_train(train_rows[f].size());
            for (std::size_t i = 0; i < train_rows[f].size(); ++i)
                y_train[static_cast<Eigen::Index>(i)] = y[train_rows[f][i]];

            NewtonConfig ncfg;
            RoughnessTerm rough{penalty, grid.values[li]};
            const LogisticFit fit = newton_raphson(d_train, y_train, ncfg, &rough);
            if (!fit.converged) return;

            DesignMatrix d_test = subset_rows(d, test_rows[f]);
            Eigen::VectorXd y_test(test_rows[f].size());
            for (std::size_t i = 0; i < test_rows[f].size(); ++i)
                y_test[static_cast<Eigen::Index>(i)] = y[test_rows[f][i]];
            const Eigen::VectorXd theta_test =
                (d_test.values * fit.beta).unaryExpr([](double a) { return expit(a); });

            double value = kNaN;
            switch (metric) {
                case CvMetric::SS: value = (y_test - theta_test).squaredNorm(); break;
                case CvMetric::LogLik: {
                    value = 0.0;
                    for (Eigen::Index i = 0; i < y_test.size(); ++i) {
                        const double t =
                            std::min(1.0 - 1e-12, std::max(1e-12, theta_test[i]));
                        value += y_test[i] * std::log(t) + (1.0 - y_test[i]) * std::log(1.0 - t);
                    }
                    break;
                }
                case CvMetric::Auc: value = auc(theta_test, y_test); break;
            }
            fold_values(li, f) = value;
        } catch (const std::exception&) {
            // fold excluded
        }
    });

    CvResult result;
    result.median_per_lambda.assign(n_lambda, kNaN);
    std::vector<TracePoint> selection_trace(n_lambda);
    for (int li = 0; li < n_lambda; ++li) {
        std::vector<double> ok_values;
        for (int f = 0; f < k; ++f) {
            result.trace.push_back({grid.values[li], static_cast<double>(f), fold_values(li, f)});
            if (std::isfinite(fold_values(li, f))) ok_values.push_back(fold_values(li, f));
        }
        selection_trace[li].lambda = grid.values[li];
        if (!ok_values.empty()) {
            result.median_per_lambda[li] = median(std::move(ok_values));
            selection_trace[li].value = result.median_per_lambda[li];
        } else {
            selection_trace[li].ok = false;
            selection_trace[li].value = kNaN;
        }
    }
    result.lambda1 =
        selection_trace[select_index(selection_trace, metric == CvMetric::SS)].lambda;
    return result;
}

Lambda2Selection select_lambda2(const DesignMatrix& d,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PenaltyPair& penalty, const KernelSmoother& kernel,
                                const Eigen::Ref<const Eigen::VectorXd>& theta_v,
                                double lambda1, const LambdaGrid& grid2, Lambda2Rule rule,
                                int threads) {
    grid2.validate();
    if (theta_v.size() != kernel.weights.rows())
        throw ShapeError("select_lambda2: target length must match kernel test points");

    NewtonConfig ncfg;
    RoughnessTerm rough{penalty, lambda1};
    const LogisticFit base_fit = newton_raphson(d, y, ncfg, &rough);
    Lambda2Selection sel;
    sel.fit1_marginal_ss = (kernel.weights * base_fit.theta_hat - theta_v).squaredNorm();

    sel.trace = scan_grid(grid2, threads, [&](double lambda2) {
        MarginalTerm mp{kernel, theta_v, lambda2};
        const LogisticFit f = newton_raphson(d, y, ncfg, &rough, &mp);
        return (kernel.weights * f.theta_hat - theta_v).squaredNorm();
    });

    if (rule == Lambda2Rule::BestFit2) {
        sel.lambda2 = sel.trace[select_index(sel.trace, true)].lambda;
        return sel;
    }
    // Rule A: smallest grid value achieving a 50% reduction against Fit1.
    if (sel.fit1_marginal_ss > 0.0) {
        for (const TracePoint& p : sel.trace) {
            if (p.ok && p.value <= 0.5 * sel.fit1_marginal_ss) {
                sel.lambda2 = p.lambda;
                break;
            }
        }
    }
    return sel;
}

double auc(const Eigen::Ref<const Eigen::VectorXd>& scores,
           const Eigen::Ref<const Eigen::VectorXd>& labels) {
    if (scores.size() != labels.size()) throw ShapeError("auc: length mismatch");
    std::vector<double> pos, neg;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1.0)
            pos.push_back(scores[i]);
        else if (labels[i] == 0.0)
            neg.push_back(scores[i]);
        else
            throw DomainError("auc: labels must be 0/1");
    }
    if (pos.empty() || neg.empty()) throw DomainError("auc: both classes required");

    // Rank-sum with midranks for ties.
    const std::size_t n = pos.size() + neg.size();
    std::vector<std::pair<double, int>> all;  // (score, is_positive)
    all.reserve(n);
    for (double s : pos) all.emplace_back(s, 1);
    for (double s : neg) all.emplace_back(s, 0);
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (all[t].second == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double n_pos = static_cast<double>(pos.size());
    const double n_neg = static_cast<double>(neg.size());
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace tps
