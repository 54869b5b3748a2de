#include <esfem/errors.hpp>
#include <esfem/fem.hpp>

#include <cmath>
#include <string>

namespace esfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index n, const Triplets& triplets)
{
    // setFromTriplets sums duplicates in insertion order, which is the fixed element order.
    SparseMatrix matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    return matrix;
}

void require_nodal(const SurfaceMesh& mesh, const Vector& u, const char* what)
{
    if (u.size() != static_cast<Eigen::Index>(mesh.num_nodes())) {
        throw FieldLengthMismatch(std::string(what) + " has length " + std::to_string(u.size()) + ", mesh has "
                                  + std::to_string(mesh.num_nodes()) + " nodes");
    }
}

void require_finite(double value)
{
    if (!std::isfinite(value)) {
        throw NonFiniteIntegrand("integrand evaluated to a non-finite value");
    }
}

} // namespace

QuadratureRule centroid_rule()
{
    return {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {1.0}, 1};
}

QuadratureRule edge_midpoint_rule()
{
    return {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 2};
}

QuadratureRule six_point_rule()
{
    // Strang-Fix / Dunavant degree 4
    constexpr double a = 0.445948490915965;
    constexpr double b = 0.091576213509771;
    constexpr double wa = 0.223381589678011;
    constexpr double wb = 0.109951743655322;
    QuadratureRule rule;
    rule.degree = 4;
    rule.points = {{a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
                   {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
    rule.weights = {wa, wa, wa, wb, wb, wb};
    return rule;
}

MassStiffness assemble_mass_stiffness(const SurfaceMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const auto rule = edge_midpoint_rule();
    Triplets mass;
    Triplets stiffness;
    mass.reserve(9 * mesh.num_triangles());
    stiffness.reserve(9 * mesh.num_triangles());

    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = element_geometry(mesh, t);
        const auto& tri = mesh.triangles()[t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                double m = 0.0;
                for (std::size_t q = 0; q < rule.weights.size(); ++q) {
                    m += rule.weights[q] * rule.points[q][a] * rule.points[q][b];
                }
                mass.emplace_back(tri[a], tri[b], geo.area * m);
                stiffness.emplace_back(tri[a], tri[b],
                                       geo.area * geo.basis_gradients[a].dot(geo.basis_gradients[b]));
            }
        }
    }
    return {from_triplets(n, mass), from_triplets(n, stiffness)};
}

SparseMatrix assemble_mass(const SurfaceMesh& mesh)
{
    return assemble_mass_stiffness(mesh).mass;
}

SparseMatrix assemble_stiffness(const SurfaceMesh& mesh)
{
    return assemble_mass_stiffness(mesh).stiffness;
}

Vector component(const Vector& w, int l)
{
    const Eigen::Index n = w.size() / 3;
    return Eigen::Map<const Vector, 0, Eigen::InnerStride<3>>(w.data() + l, n);
}

void set_component(Vector& w, int l, const Vector& values)
{
    Eigen::Map<Vector, 0, Eigen::InnerStride<3>>(w.data() + l, values.size()) = values;
}

Vector apply_blockwise(const SparseMatrix& scalar, const Vector& w)
{
    if (w.size() != 3 * scalar.cols()) {
        throw DimensionMismatch("block operand has length " + std::to_string(w.size()) + ", expected "
                                + std::to_string(3 * scalar.cols()));
    }
    Vector out(w.size());
    for (int l = 0; l < 3; ++l) {
        set_component(out, l, scalar * component(w, l));
    }
    return out;
}

Vector BlockSystemMatrix::apply(const Vector& w) const
{
    return apply_blockwise(m_scalar, w);
}

SparseMatrix BlockSystemMatrix::expanded() const
{
    Triplets triplets;
    triplets.reserve(3 * static_cast<std::size_t>(m_scalar.nonZeros()));
    for (Eigen::Index col = 0; col < m_scalar.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m_scalar, col); it; ++it) {
            for (int l = 0; l < 3; ++l) {
                triplets.emplace_back(3 * it.row() + l, 3 * it.col() + l, it.value());
            }
        }
    }
    return from_triplets(3 * m_scalar.rows(), triplets);
}

BlockSystemMatrix build_velocity_matrix(const SparseMatrix& mass, const SparseMatrix& stiffness, double alpha)
{
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("alpha must be non-negative");
    }
    if (mass.rows() != stiffness.rows() || mass.cols() != stiffness.cols()) {
        throw DimensionMismatch("mass and stiffness matrices differ in size");
    }
    SparseMatrix scalar = mass + alpha * stiffness;
    return BlockSystemMatrix(std::move(scalar));
}

BlockSystemMatrix build_velocity_matrix(const SurfaceMesh& mesh, double alpha)
{
    const auto ms = assemble_mass_stiffness(mesh);
    return build_velocity_matrix(ms.mass, ms.stiffness, alpha);
}

Vector assemble_normal_coupling(const SurfaceMesh& mesh, const Vector& u, NormalCoupling mode)
{
    require_nodal(mesh, u, "u");
    Vector out = Vector::Zero(3 * u.size());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = element_geometry(mesh, t);
        const auto& tri = mesh.triangles()[t];
        for (int a = 0; a < 3; ++a) {
            double weight = 0.0;
            if (mode == NormalCoupling::nodal) {
                // int phi_a = |T| / 3
                weight = u[tri[a]] * geo.area / 3.0;
            } else {
                for (int b = 0; b < 3; ++b) {
                    weight += geo.area * (a == b ? 2.0 : 1.0) / 12.0 * u[tri[b]];
                }
            }
            out.segment<3>(3 * tri[a]) += weight * geo.unit_normal;
        }
    }
    return out;
}

namespace {

/// Visits every quadrature point: callback(t, geo, barycentric, weight * area, position).
template <typename Callback>
void for_each_quadrature_point(const SurfaceMesh& mesh, const QuadratureRule& rule, Callback&& callback)
{
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = element_geometry(mesh, t);
        const auto p = mesh.corners(t);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const auto& lam = rule.points[q];
            const Vec3 position = lam[0] * p[0] + lam[1] * p[1] + lam[2] * p[2];
            callback(t, geo, lam, rule.weights[q] * geo.area, position);
        }
    }
}

template <typename Scatter>
void assemble_load(const SurfaceMesh& mesh, const Vector& u, double time, const LoadIntegrand& integrand,
                   Scatter&& scatter)
{
    require_nodal(mesh, u, "u");
    for_each_quadrature_point(mesh, edge_midpoint_rule(),
                              [&](std::size_t t, const ElementGeometry& geo, const std::array<double, 3>& lam,
                                  double weight, const Vec3& position) {
                                  const auto& tri = mesh.triangles()[t];
                                  double value = 0.0;
                                  Vec3 gradient = Vec3::Zero();
                                  for (int a = 0; a < 3; ++a) {
                                      value += lam[a] * u[tri[a]];
                                      gradient += u[tri[a]] * geo.basis_gradients[a];
                                  }
                                  const double f = integrand(position, value, gradient, time);
                                  require_finite(f);
                                  for (int a = 0; a < 3; ++a) {
                                      scatter(tri[a], geo, weight * f * lam[a]);
                                  }
                              });
}

} // namespace

Vector assemble_scalar_load(const SurfaceMesh& mesh, const Vector& u, double time, const LoadIntegrand& integrand)
{
    Vector out = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    assemble_load(mesh, u, time, integrand,
                  [&](int node, const ElementGeometry&, double contribution) { out[node] += contribution; });
    return out;
}

Vector assemble_normal_load(const SurfaceMesh& mesh, const Vector& u, double time, const LoadIntegrand& integrand)
{
    Vector out = Vector::Zero(3 * static_cast<Eigen::Index>(mesh.num_nodes()));
    assemble_load(mesh, u, time, integrand, [&](int node, const ElementGeometry& geo, double contribution) {
        out.segment<3>(3 * node) += contribution * geo.unit_normal;
    });
    return out;
}

Vector assemble_reaction_load(const SurfaceMesh& mesh, const Vector& u, const Vector& w,
                              const std::function<double(double, double)>& reaction)
{
    require_nodal(mesh, u, "u");
    require_nodal(mesh, w, "w");
    Vector out = Vector::Zero(u.size());
    for_each_quadrature_point(mesh, edge_midpoint_rule(),
                              [&](std::size_t t, const ElementGeometry&, const std::array<double, 3>& lam,
                                  double weight, const Vec3&) {
                                  const auto& tri = mesh.triangles()[t];
                                  double uh = 0.0;
                                  double wh = 0.0;
                                  for (int a = 0; a < 3; ++a) {
                                      uh += lam[a] * u[tri[a]];
                                      wh += lam[a] * w[tri[a]];
                                  }
                                  const double r = reaction(uh, wh);
                                  require_finite(r);
                                  for (int a = 0; a < 3; ++a) {
                                      out[tri[a]] += weight * r * lam[a];
                                  }
                              });
    return out;
}

double quadratic_form(const SparseMatrix& scalar, const Vector& w)
{
    if (w.size() == scalar.cols()) {
        return w.dot(scalar * w);
    }
    if (w.size() == 3 * scalar.cols()) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l) {
            const Vector wl = component(w, l);
            sum += wl.dot(scalar * wl);
        }
        return sum;
    }
    throw DimensionMismatch("vector of length " + std::to_string(w.size()) + " does not match matrix of size "
                            + std::to_string(scalar.cols()));
}

DiscreteNorms discrete_norms(const SparseMatrix& mass, const SparseMatrix& stiffness, double alpha, const Vector& w)
{
    if (mass.rows() != stiffness.rows() || mass.cols() != stiffness.cols()) {
        throw DimensionMismatch("mass and stiffness matrices differ in size");
    }
    const double m2 = quadratic_form(mass, w);
    const double a2 = quadratic_form(stiffness, w);
    const SparseMatrix velocity = mass + alpha * stiffness;
    const double k2 = quadratic_form(velocity, w);
    // Roundoff can make the PSD form slightly negative.
    return {std::sqrt(std::max(m2, 0.0)), std::sqrt(std::max(a2, 0.0)), std::sqrt(std::max(k2, 0.0))};
}

} // namespace esfem
