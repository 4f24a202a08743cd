#pragma once

#include <Eigen/Sparse>

#include "legible/mdp.hpp"

namespace legible::detail {

// (I - gamma P_pi) for a fixed policy.
Eigen::SparseMatrix<double> policy_system(const TabularMdp& mdp, const Policy& policy);

// Solves system * x = rhs; throws InvalidModel when the factorization fails.
Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& system,
                             const Eigen::VectorXd& rhs);

}  // namespace legible::detail
