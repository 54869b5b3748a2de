#include <esfem/errors.hpp>
#include <esfem/linear_solver.hpp>

#include <limits>

namespace esfem {

SymmetricSolver::SymmetricSolver(const SparseMatrix& matrix, SolverOptions options)
    : m_options(options)
{
    if (options.kind == SolverKind::cholesky) {
        m_direct.compute(matrix);
        if (m_direct.info() != Eigen::Success) {
            throw LinearSolveFailure(std::numeric_limits<double>::quiet_NaN(), 0);
        }
    } else {
        m_matrix = matrix;
        m_cg.setTolerance(options.cg_tolerance);
        m_cg.setMaxIterations(options.cg_max_iterations);
        m_cg.compute(m_matrix);
    }
}

Vector SymmetricSolver::solve(const Vector& rhs) const
{
    if (m_options.kind == SolverKind::cholesky) {
        Vector x = m_direct.solve(rhs);
        if (!x.allFinite()) {
            throw LinearSolveFailure(std::numeric_limits<double>::quiet_NaN(), 0);
        }
        return x;
    }
    if (rhs.squaredNorm() == 0.0) {
        return Vector::Zero(rhs.size());
    }
    Vector x = m_cg.solve(rhs);
    if (m_cg.info() != Eigen::Success || !x.allFinite()) {
        throw LinearSolveFailure(m_cg.error(), static_cast<int>(m_cg.iterations()));
    }
    // the recursive residual can drift below the true one; do not trust it alone
    const double residual = (rhs - m_matrix * x).norm() / rhs.norm();
    if (!(residual <= m_options.cg_tolerance)) {
        throw LinearSolveFailure(residual, static_cast<int>(m_cg.iterations()));
    }
    return x;
}

Vector SymmetricSolver::solve_blockwise(const Vector& rhs) const
{
    Vector out(rhs.size());
    for (int l = 0; l < 3; ++l) {
        set_component(out, l, solve(component(rhs, l)));
    }
    return out;
}

} // namespace esfem
