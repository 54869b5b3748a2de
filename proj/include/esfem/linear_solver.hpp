#pragma once

#include <esfem/fem.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <memory>

namespace esfem {

enum class SolverKind { cholesky, conjugate_gradient };

struct SolverOptions
{
    SolverKind kind = SolverKind::cholesky;
    double cg_tolerance = 1e-12; ///< relative residual ||r|| / ||b||
    int cg_max_iterations = 20000;
};

///
/// Factorizes (or prepares CG for) one symmetric positive definite matrix and solves against
/// any number of right-hand sides. Throws LinearSolveFailure on breakdown or CG non-convergence;
/// CG convergence is judged on the true residual ||b - S x|| / ||b||, not the recursive one.
///
class SymmetricSolver
{
public:
    SymmetricSolver(const SparseMatrix& matrix, SolverOptions options);

    Vector solve(const Vector& rhs) const;
    /// Solves I_3 (x) S for a node-major 3N right-hand side.
    Vector solve_blockwise(const Vector& rhs) const;

private:
    SolverOptions m_options;
    SparseMatrix m_matrix; ///< owned copy: CG keeps a reference and the true residual needs it
    Eigen::SimplicialLDLT<SparseMatrix> m_direct;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> m_cg;
};

} // namespace esfem
