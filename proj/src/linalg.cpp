#include "tps/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tps/errors.hpp"

namespace tps {

Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                double condition_limit) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw ShapeError("solve_symmetric: A must be square and conformable with b");

    if (A.cwiseAbs().maxCoeff() == 0.0)
        throw RankError("solve_symmetric: matrix is zero",
                        std::numeric_limits<double>::infinity());

    // Fast path: accept the LDLT solution only if it verifiably solves the
    // system. This rejects both ill-conditioned factorizations and the
    // indefinite cases LDLT is not built for.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd x = ldlt.solve(b);
        if (x.allFinite()) {
            const double scale = A.cwiseAbs().maxCoeff() *
                                     std::max(1.0, x.cwiseAbs().maxCoeff()) +
                                 b.cwiseAbs().maxCoeff();
            if ((A * x - b).cwiseAbs().maxCoeff() <= 1e-10 * scale) return x;
        }
    }

    // Rank-revealing fallback: minimum-norm solution on the numerically
    // independent directions.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    const Eigen::Index rank = cod.rank();
    if (rank == 0)
        throw RankError("solve_symmetric: matrix is numerically zero",
                        std::numeric_limits<double>::infinity());

    const Eigen::VectorXd t_diag = cod.matrixT().diagonal();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rank; ++i) {
        const double d = std::abs(t_diag[i]);
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    const double cond = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (cond > condition_limit)
        throw RankError("solve_symmetric: condition estimate " + std::to_string(cond) +
                            " exceeds limit",
                        cond);

    Eigen::VectorXd x = cod.solve(b);
    if (!x.allFinite())
        throw NumericalError("solve_symmetric: non-finite solution");
    return x;
}

}  // namespace tps
