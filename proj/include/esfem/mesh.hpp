#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

namespace esfem {

using Vec3 = Eigen::Vector3d;
using Vector = Eigen::VectorXd;

///
/// Flat node-major array of N points in R^3: entry 3*j + l is coordinate l of node j.
///
/// Also used for nodal velocities and other nodal vector fields.
///
class NodeVector
{
public:
    NodeVector() = default;
    explicit NodeVector(std::size_t num_nodes);
    explicit NodeVector(Vector flat);

    std::size_t num_nodes() const { return static_cast<std::size_t>(m_flat.size() / 3); }

    Vec3 node(std::size_t j) const { return m_flat.segment<3>(3 * static_cast<Eigen::Index>(j)); }
    void set_node(std::size_t j, const Vec3& p) { m_flat.segment<3>(3 * static_cast<Eigen::Index>(j)) = p; }

    const Vector& flat() const { return m_flat; }
    Vector& flat() { return m_flat; }

    bool all_finite() const { return m_flat.allFinite(); }

private:
    Vector m_flat;
};

using Triangle = std::array<int, 3>;
using Triangulation = std::vector<Triangle>;

enum class Topology {
    closed,     ///< every edge shared by two oppositely traversed triangles, outward orientation
    open_patch, ///< only index ranges are checked; for local tests
};

///
/// Triangulated surface Gamma_h(x): node positions plus connectivity.
///
/// Immutable after construction. h_max is recomputed from the nodes on every construction.
///
class SurfaceMesh
{
public:
    SurfaceMesh(NodeVector nodes, Triangulation triangles, Topology topology = Topology::closed);

    /// Same connectivity, new node positions (evolution keeps the topology).
    SurfaceMesh with_nodes(NodeVector nodes) const;

    const NodeVector& nodes() const { return m_nodes; }
    const Triangulation& triangles() const { return m_triangles; }
    std::size_t num_nodes() const { return m_nodes.num_nodes(); }
    std::size_t num_triangles() const { return m_triangles.size(); }
    Topology topology() const { return m_topology; }
    double h_max() const { return m_h_max; }

    std::array<Vec3, 3> corners(std::size_t t) const;

    /// Sum over triangles of the signed volume of the tetrahedron (origin, triangle).
    double signed_volume() const;

private:
    struct Unchecked
    {};
    SurfaceMesh(Unchecked, NodeVector nodes, Triangulation triangles, Topology topology);

    void compute_h_max();

    NodeVector m_nodes;
    Triangulation m_triangles;
    Topology m_topology;
    double m_h_max = 0.0;
};

/// Area, outward normal and the constant tangential gradients of the three P1 basis functions.
struct ElementGeometry
{
    double area = 0.0;
    Vec3 unit_normal = Vec3::Zero();
    std::array<Vec3, 3> basis_gradients{};
};

/// Throws DegenerateElement if the area is below 1e-14 * h_max^2.
ElementGeometry element_geometry(const SurfaceMesh& mesh, std::size_t triangle_index);

/// Geometry without the degeneracy check; zero-area triangles give zero normal and gradients.
ElementGeometry element_geometry_unchecked(const SurfaceMesh& mesh, std::size_t triangle_index);

struct QualityReport
{
    double min_angle_deg = 0.0;
    double max_aspect_ratio = 0.0; ///< longest edge over 2*sqrt(3)*inradius; 1 for equilateral
    double min_area = 0.0;
};

QualityReport mesh_quality(const SurfaceMesh& mesh);

///
/// Icosahedron of the given radius refined by uniform quadrisection with new nodes projected
/// back onto the sphere. Level L has 20 * 4^L triangles and 10 * 4^L + 2 nodes.
///
SurfaceMesh generate_icosphere(int subdivision_level, double radius);

/// Sum over triangles of area * unit normal; vanishes on closed, consistently oriented meshes.
Vec3 area_weighted_normal_sum(const SurfaceMesh& mesh);

double total_area(const SurfaceMesh& mesh);

} // namespace esfem
