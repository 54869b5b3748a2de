#include <esfem/errors.hpp>
#include <esfem/mesh.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

namespace esfem {

NodeVector::NodeVector(std::size_t num_nodes)
    : m_flat(Vector::Zero(3 * static_cast<Eigen::Index>(num_nodes)))
{}

NodeVector::NodeVector(Vector flat)
    : m_flat(std::move(flat))
{
    if (m_flat.size() % 3 != 0) {
        throw FieldLengthMismatch("node vector length " + std::to_string(m_flat.size())
                                  + " is not divisible by 3");
    }
}

SurfaceMesh::SurfaceMesh(NodeVector nodes, Triangulation triangles, Topology topology)
    : SurfaceMesh(Unchecked{}, std::move(nodes), std::move(triangles), topology)
{
    if (!m_nodes.all_finite()) {
        throw InvalidMesh("node coordinates must be finite");
    }
    const int n = static_cast<int>(num_nodes());
    for (const auto& tri : m_triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw InvalidMesh("triangle index " + std::to_string(idx) + " out of range");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw InvalidMesh("triangle with repeated vertex");
        }
    }
    if (topology == Topology::open_patch) {
        return;
    }

    // Each directed edge must occur once, and its reverse exactly once.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& tri : m_triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto edge = std::make_pair(tri[k], tri[(k + 1) % 3]);
            if (++directed[edge] > 1) {
                throw InvalidMesh("inconsistent orientation: directed edge (" + std::to_string(edge.first)
                                  + "," + std::to_string(edge.second) + ") traversed twice");
            }
        }
    }
    for (const auto& [edge, count] : directed) {
        if (!directed.contains({edge.second, edge.first})) {
            throw InvalidMesh("surface is not closed: edge (" + std::to_string(edge.first) + ","
                              + std::to_string(edge.second) + ") has a single triangle");
        }
    }
    if (!(signed_volume() > 0.0)) {
        throw InvalidMesh("triangulation is inward oriented (non-positive signed volume)");
    }
}

SurfaceMesh::SurfaceMesh(Unchecked, NodeVector nodes, Triangulation triangles, Topology topology)
    : m_nodes(std::move(nodes))
    , m_triangles(std::move(triangles))
    , m_topology(topology)
{
    compute_h_max();
}

SurfaceMesh SurfaceMesh::with_nodes(NodeVector nodes) const
{
    if (nodes.num_nodes() != num_nodes()) {
        throw FieldLengthMismatch("node vector has " + std::to_string(nodes.num_nodes()) + " nodes, mesh has "
                                  + std::to_string(num_nodes()));
    }
    if (!nodes.all_finite()) {
        throw InvalidMesh("node coordinates must be finite");
    }
    return SurfaceMesh(Unchecked{}, std::move(nodes), m_triangles, m_topology);
}

std::array<Vec3, 3> SurfaceMesh::corners(std::size_t t) const
{
    const auto& tri = m_triangles[t];
    return {m_nodes.node(tri[0]), m_nodes.node(tri[1]), m_nodes.node(tri[2])};
}

double SurfaceMesh::signed_volume() const
{
    double volume = 0.0;
    for (std::size_t t = 0; t < m_triangles.size(); ++t) {
        const auto [a, b, c] = corners(t);
        volume += a.dot(b.cross(c)) / 6.0;
    }
    return volume;
}

void SurfaceMesh::compute_h_max()
{
    m_h_max = 0.0;
    for (std::size_t t = 0; t < m_triangles.size(); ++t) {
        const auto [a, b, c] = corners(t);
        m_h_max = std::max({m_h_max, (b - a).norm(), (c - b).norm(), (a - c).norm()});
    }
}

ElementGeometry element_geometry_unchecked(const SurfaceMesh& mesh, std::size_t triangle_index)
{
    const auto p = mesh.corners(triangle_index);
    const Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
    const double twice_area = n.norm();

    ElementGeometry geo;
    geo.area = 0.5 * twice_area;
    if (twice_area == 0.0) {
        return geo;
    }
    geo.unit_normal = n / twice_area;
    // grad phi_i = nu x (p_{i+2} - p_{i+1}) / (2 |T|)
    for (int i = 0; i < 3; ++i) {
        geo.basis_gradients[i] = geo.unit_normal.cross(p[(i + 2) % 3] - p[(i + 1) % 3]) / twice_area;
    }
    return geo;
}

ElementGeometry element_geometry(const SurfaceMesh& mesh, std::size_t triangle_index)
{
    if (triangle_index >= mesh.num_triangles()) {
        throw std::out_of_range("triangle index " + std::to_string(triangle_index) + " out of range");
    }
    auto geo = element_geometry_unchecked(mesh, triangle_index);
    const double h = mesh.h_max();
    if (!(geo.area >= 1e-14 * h * h) || geo.area == 0.0) {
        throw DegenerateElement(triangle_index, geo.area);
    }
    return geo;
}

QualityReport mesh_quality(const SurfaceMesh& mesh)
{
    constexpr double rad_to_deg = 180.0 / std::numbers::pi;
    QualityReport q;
    q.min_angle_deg = std::numeric_limits<double>::infinity();
    q.min_area = std::numeric_limits<double>::infinity();
    q.max_aspect_ratio = 0.0;

    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto p = mesh.corners(t);
        const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
        double perimeter = 0.0;
        double longest = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Vec3 e1 = p[(i + 1) % 3] - p[i];
            const Vec3 e2 = p[(i + 2) % 3] - p[i];
            // atan2 stays accurate for nearly flat angles
            const double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2)) * rad_to_deg;
            q.min_angle_deg = std::min(q.min_angle_deg, angle);
            perimeter += e1.norm();
            longest = std::max(longest, e1.norm());
        }
        q.min_area = std::min(q.min_area, area);
        const double inradius = 2.0 * area / perimeter;
        const double aspect =
            inradius > 0.0 ? longest / (2.0 * std::sqrt(3.0) * inradius) : std::numeric_limits<double>::infinity();
        q.max_aspect_ratio = std::max(q.max_aspect_ratio, aspect);
    }
    return q;
}

SurfaceMesh generate_icosphere(int subdivision_level, double radius)
{
    if (subdivision_level < 0) {
        throw std::invalid_argument("subdivision level must be non-negative");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("radius must be positive");
    }

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> points = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& p : points) {
        p.normalize();
    }
    Triangulation faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int level = 0; level < subdivision_level; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto midpoint_of = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, static_cast<int>(points.size()));
            if (inserted) {
                points.push_back((points[a] + points[b]).normalized());
            }
            return it->second;
        };
        Triangulation refined;
        refined.reserve(4 * faces.size());
        for (const auto& [a, b, c] : faces) {
            const int ab = midpoint_of(a, b);
            const int bc = midpoint_of(b, c);
            const int ca = midpoint_of(c, a);
            refined.push_back({a, ab, ca});
            refined.push_back({b, bc, ab});
            refined.push_back({c, ca, bc});
            refined.push_back({ab, bc, ca});
        }
        faces = std::move(refined);
    }

    NodeVector nodes(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        nodes.set_node(j, radius * points[j]);
    }
    return SurfaceMesh(std::move(nodes), std::move(faces), Topology::closed);
}

Vec3 area_weighted_normal_sum(const SurfaceMesh& mesh)
{
    Vec3 sum = Vec3::Zero();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto p = mesh.corners(t);
        sum += 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    }
    return sum;
}

double total_area(const SurfaceMesh& mesh)
{
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        area += element_geometry_unchecked(mesh, t).area;
    }
    return area;
}

} // namespace esfem
