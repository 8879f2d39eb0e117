#ifndef TPS_LINALG_HPP
#define TPS_LINALG_HPP

#include <Eigen/Dense>

namespace tps {

// Solves the symmetric system A x = b for the penalized normal equations.
//
// Fast path is an LDLT factorization. Partition-of-unity basis blocks make the
// spline designs exactly collinear with the intercept column, so the normal
// matrix is structurally rank-deficient; when LDLT reports trouble the solve
// falls back to a rank-revealing complete orthogonal decomposition and returns
// the minimum-norm least-squares solution. Fitted values D*x are unique either
// way. Throws RankError when even the revealed subsystem has condition above
// `condition_limit`.
Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                double condition_limit = 1e12);

}  // namespace tps

#endif
