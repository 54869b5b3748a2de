#pragma once

#include <esfem/mesh.hpp>

#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <vector>

namespace esfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Quadrature on the reference triangle in barycentric coordinates; weights sum to one.
struct QuadratureRule
{
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Centroid rule, exact for degree 1.
QuadratureRule centroid_rule();
/// Three edge midpoints, exact for degree 2. Used for every mass and load integral.
QuadratureRule edge_midpoint_rule();
/// Six-point symmetric rule, exact for degree 4.
QuadratureRule six_point_rule();

/// N x N mass matrix M(x)_jk = int phi_j phi_k.
SparseMatrix assemble_mass(const SurfaceMesh& mesh);
/// N x N stiffness matrix A(x)_jk = int grad phi_j . grad phi_k.
SparseMatrix assemble_stiffness(const SurfaceMesh& mesh);

/// Both matrices in one element sweep; identical to the separate assemblers.
struct MassStiffness
{
    SparseMatrix mass;
    SparseMatrix stiffness;
};
MassStiffness assemble_mass_stiffness(const SurfaceMesh& mesh);

///
/// K(x) = I_3 (x) (M + alpha A), stored through its scalar part.
///
/// Vectors of length 3N are node-major, so component l of node j sits at 3j + l.
///
class BlockSystemMatrix
{
public:
    BlockSystemMatrix() = default;
    explicit BlockSystemMatrix(SparseMatrix scalar_part)
        : m_scalar(std::move(scalar_part))
    {}

    const SparseMatrix& scalar_part() const { return m_scalar; }
    Eigen::Index num_nodes() const { return m_scalar.rows(); }

    Vector apply(const Vector& w) const;

    /// Explicit 3N x 3N matrix, for cross-checks.
    SparseMatrix expanded() const;

private:
    SparseMatrix m_scalar;
};

BlockSystemMatrix build_velocity_matrix(const SurfaceMesh& mesh, double alpha);
BlockSystemMatrix build_velocity_matrix(const SparseMatrix& mass, const SparseMatrix& stiffness, double alpha);

/// Component l in {0,1,2} of a node-major 3N vector.
Vector component(const Vector& w, int l);
void set_component(Vector& w, int l, const Vector& values);
/// Applies an N x N matrix to each of the three interleaved components.
Vector apply_blockwise(const SparseMatrix& scalar, const Vector& w);

enum class NormalCoupling {
    nodal,        ///< int nu_l u_j phi_j, the nodal coefficient inside the integral
    interpolated, ///< int nu_l u_h phi_j
};

/// N(x)u in R^{3N}, with the piecewise constant element normal.
Vector assemble_normal_coupling(const SurfaceMesh& mesh, const Vector& u,
                                NormalCoupling mode = NormalCoupling::nodal);

/// Integrand f(position, u_h, grad u_h, t) evaluated at quadrature points.
using LoadIntegrand = std::function<double(const Vec3& position, double value, const Vec3& gradient, double time)>;

/// int f(x, u_h, grad u_h, t) phi_j, degree-2 quadrature, elements visited in index order.
Vector assemble_scalar_load(const SurfaceMesh& mesh, const Vector& u, double time, const LoadIntegrand& integrand);

/// int g(x, u_h, grad u_h, t) (nu)_l phi_j, stored at 3j + l.
Vector assemble_normal_load(const SurfaceMesh& mesh, const Vector& u, double time, const LoadIntegrand& integrand);

/// int r(u_h, w_h) phi_j for two coupled species.
Vector assemble_reaction_load(const SurfaceMesh& mesh, const Vector& u, const Vector& w,
                              const std::function<double(double, double)>& reaction);

struct DiscreteNorms
{
    double mass = 0.0;      ///< ||w||_M
    double stiffness = 0.0; ///< ||w||_A
    double velocity = 0.0;  ///< ||w||_K, K = M + alpha A (blockwise for 3N vectors)
};

/// Norms of an N vector, or blockwise norms of a 3N vector.
DiscreteNorms discrete_norms(const SparseMatrix& mass, const SparseMatrix& stiffness, double alpha, const Vector& w);

/// w^T S w for an N vector, or the blockwise sum for a 3N vector.
double quadratic_form(const SparseMatrix& scalar, const Vector& w);

} // namespace esfem
