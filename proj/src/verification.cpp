#include <esfem/errors.hpp>
#include <esfem/problems.hpp>
#include <esfem/rng.hpp>
#include <esfem/verification.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace esfem {

GaussLegendre gauss_legendre(int points)
{
    if (points < 1) {
        throw std::invalid_argument("Gauss-Legendre needs at least one point");
    }
    // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
    for (int k = 1; k < points; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussLegendre rule;
    for (int i = 0; i < points; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        rule.nodes.push_back(0.5 * (eig.eigenvalues()[i] + 1.0));
        rule.weights.push_back(v0 * v0); // 2 v0^2 on [-1,1], halved for [0,1]
    }
    return rule;
}

namespace {

SurfaceMesh shifted(const SurfaceMesh& mesh, const Vector& e, double theta)
{
    return mesh.with_nodes(NodeVector(Vector(mesh.nodes().flat() + theta * e)));
}

Eigen::Matrix3d element_gradient(const ElementGeometry& geo, const Triangle& tri, const Vector& field)
{
    // E = sum_a e_a (grad phi_a)^T
    Eigen::Matrix3d grad = Eigen::Matrix3d::Zero();
    for (int a = 0; a < 3; ++a) {
        grad += field.segment<3>(3 * tri[a]) * geo.basis_gradients[a].transpose();
    }
    return grad;
}

double local_mass_form(const ElementGeometry& geo, const Triangle& tri, const Vector& w, const Vector& z)
{
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            sum += w[tri[a]] * z[tri[b]] * (a == b ? 2.0 : 1.0);
        }
    }
    return geo.area * sum / 12.0;
}

Vec3 local_gradient(const ElementGeometry& geo, const Triangle& tri, const Vector& w)
{
    Vec3 grad = Vec3::Zero();
    for (int a = 0; a < 3; ++a) {
        grad += w[tri[a]] * geo.basis_gradients[a];
    }
    return grad;
}

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6e", value);
    return buf;
}

} // namespace

std::vector<double> tangential_divergence(const SurfaceMesh& mesh, const Vector& field)
{
    if (field.size() != 3 * static_cast<Eigen::Index>(mesh.num_nodes())) {
        throw FieldLengthMismatch("vector field must have length 3N");
    }
    std::vector<double> div(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = element_geometry(mesh, t);
        div[t] = element_gradient(geo, mesh.triangles()[t], field).trace();
    }
    return div;
}

double transport_q_form(const SurfaceMesh& mesh, const Vector& velocity, const Vector& w, const Vector& z)
{
    const auto div = tangential_divergence(mesh, velocity);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = element_geometry(mesh, t);
        sum += div[t] * local_mass_form(geo, mesh.triangles()[t], w, z);
    }
    return sum;
}

MatrixDifferenceCheck check_matrix_difference(const SurfaceMesh& mesh_y, const Vector& e, const Vector& w,
                                              const Vector& z, int theta_points)
{
    const auto n = static_cast<Eigen::Index>(mesh_y.num_nodes());
    if (e.size() != 3 * n || w.size() != n || z.size() != n) {
        throw FieldLengthMismatch("check_matrix_difference: e must have length 3N, w and z length N");
    }

    MatrixDifferenceCheck out;
    try {
        const auto at_y = assemble_mass_stiffness(mesh_y);
        const auto at_x = assemble_mass_stiffness(shifted(mesh_y, e, 1.0));
        out.mass.lhs = w.dot(at_x.mass * z) - w.dot(at_y.mass * z);
        out.stiffness.lhs = w.dot(at_x.stiffness * z) - w.dot(at_y.stiffness * z);

        const auto rule = gauss_legendre(theta_points);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const auto mesh = shifted(mesh_y, e, rule.nodes[q]);
            double mass_part = 0.0;
            double stiffness_part = 0.0;
            for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
                const auto geo = element_geometry(mesh, t);
                const auto& tri = mesh.triangles()[t];
                const Eigen::Matrix3d grad_e = element_gradient(geo, tri, e);
                const double div = grad_e.trace();
                mass_part += div * local_mass_form(geo, tri, w, z);
                const Eigen::Matrix3d deformation =
                    div * Eigen::Matrix3d::Identity() - (grad_e + grad_e.transpose());
                stiffness_part +=
                    geo.area * local_gradient(geo, tri, w).dot(deformation * local_gradient(geo, tri, z));
            }
            out.mass.rhs += rule.weights[q] * mass_part;
            out.stiffness.rhs += rule.weights[q] * stiffness_part;
        }
    } catch (const DegenerateElement& err) {
        throw DegenerateIntermediateMesh(std::string("intermediate surface degenerate: ") + err.what());
    }
    out.mass.difference = std::abs(out.mass.lhs - out.mass.rhs);
    out.stiffness.difference = std::abs(out.stiffness.lhs - out.stiffness.rhs);
    return out;
}

TransportCheck check_transport(const SurfaceMesh& topology, const std::function<Vector(double)>& path,
                               const std::function<Vector(double)>& path_velocity, const Vector& w,
                               const Vector& z, double s0, double ds)
{
    auto form = [&](double s) {
        const auto mesh = topology.with_nodes(NodeVector(path(s)));
        return w.dot(assemble_mass(mesh) * z);
    };
    TransportCheck out;
    const auto mesh0 = topology.with_nodes(NodeVector(path(s0)));
    out.exact_derivative = transport_q_form(mesh0, path_velocity(s0), w, z);
    const double f0 = form(s0);
    for (int k = 0; k < 3; ++k) {
        const double h = ds / std::pow(2.0, k);
        out.steps.push_back(h);
        out.fd_errors.push_back(std::abs((form(s0 + h) - f0) / h - out.exact_derivative));
    }
    if (out.fd_errors[1] == 0.0 || out.fd_errors[2] == 0.0) {
        // Exactly linear along the path: the difference quotient is already exact.
        out.observed_order = std::numeric_limits<double>::infinity();
        return out;
    }
    const double p1 = std::log2(out.fd_errors[0] / out.fd_errors[1]);
    const double p2 = std::log2(out.fd_errors[1] / out.fd_errors[2]);
    out.observed_order = std::min(p1, p2);
    return out;
}

NormEquivalenceCheck check_norm_equivalence(const SurfaceMesh& mesh_y, const Vector& e, const Vector& w)
{
    NormEquivalenceCheck out;
    double max_div = 0.0;
    for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        try {
            for (double d : tangential_divergence(shifted(mesh_y, e, theta), e)) {
                max_div = std::max(max_div, std::abs(d));
            }
        } catch (const DegenerateElement& err) {
            throw DegenerateIntermediateMesh(std::string("intermediate surface degenerate: ") + err.what());
        }
    }
    out.mu = 1.1 * max_div;
    const double norm_y = std::sqrt(w.dot(assemble_mass(mesh_y) * w));
    const double norm_x = std::sqrt(w.dot(assemble_mass(shifted(mesh_y, e, 1.0)) * w));
    out.ratio = norm_y > 0.0 ? norm_x / norm_y : 1.0;
    out.bound = std::exp(out.mu / 2.0);
    return out;
}

NormEquivalenceSweep norm_equivalence_sweep(const SurfaceMesh& mesh_y, std::size_t samples, std::uint64_t seed,
                                            double scale)
{
    CounterRng rng(seed, 7);
    const auto n = static_cast<Eigen::Index>(mesh_y.num_nodes());
    NormEquivalenceSweep out;
    for (std::size_t s = 0; s < samples; ++s) {
        Vector e(3 * n);
        Vector w(n);
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            e[i] = rng.uniform(-1.0, 1.0);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            w[i] = rng.normal();
        }
        e *= scale * mesh_y.h_max() / e.lpNorm<Eigen::Infinity>();
        const auto check = check_norm_equivalence(mesh_y, e, w);
        const double r = check.ratio / check.bound;
        out.worst_ratio_over_bound = std::max(out.worst_ratio_over_bound, r);
        if (r > 1.0 + 1e-6) {
            ++out.violations;
        }
        ++out.samples;
    }
    return out;
}

SphereIdentities check_sphere_identities(int level, double radius)
{
    const auto mesh = generate_icosphere(level, radius);
    const auto [mass, stiffness] = assemble_mass_stiffness(mesh);
    SphereIdentities out;
    out.level = level;
    const double sphere_area = 4.0 * std::numbers::pi * radius * radius;
    const double area = total_area(mesh);
    out.area_defect = (sphere_area - area) / sphere_area;
    out.normal_sum = area_weighted_normal_sum(mesh).norm() / area;

    const Vector& x = mesh.nodes().flat();
    const Vector residual = apply_blockwise(stiffness, x) - (2.0 / (radius * radius)) * apply_blockwise(mass, x);
    for (Eigen::Index j = 0; j < residual.size() / 3; ++j) {
        out.laplace_residual = std::max(out.laplace_residual, residual.segment<3>(3 * j).norm());
    }
    return out;
}

std::string format_record(const CheckRecord& record)
{
    return "CHECK " + record.name + " residual=" + format_double(record.residual) + " bound="
           + format_double(record.bound) + (record.pass() ? " PASS" : " FAIL");
}

namespace {

Vector random_vector(CounterRng& rng, Eigen::Index size)
{
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v[i] = rng.uniform(-1.0, 1.0);
    }
    return v;
}

bool bitwise_equal(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.nonZeros() != b.nonZeros() || a.rows() != b.rows()) {
        return false;
    }
    return std::equal(a.valuePtr(), a.valuePtr() + a.nonZeros(), b.valuePtr())
           && std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

} // namespace

std::vector<CheckRecord> run_verification_suite(const VerificationOptions& options)
{
    using Cmp = CheckRecord::Comparison;
    std::vector<CheckRecord> records;
    CounterRng rng(options.seed, 3);

    const auto mesh = generate_icosphere(options.mesh_level, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const auto [mass, stiffness] = assemble_mass_stiffness(mesh);

    {
        Vector e = random_vector(rng, 3 * n);
        e *= 0.01 * mesh.h_max() / e.lpNorm<Eigen::Infinity>();
        const Vector w = random_vector(rng, n);
        const Vector z = random_vector(rng, n);
        const auto check = check_matrix_difference(mesh, e, w, z, options.theta_points);
        const double scale_m = std::sqrt(w.dot(mass * w) * z.dot(mass * z));
        const double scale_a = std::sqrt(w.dot(stiffness * w) * z.dot(stiffness * z));
        records.push_back({"matrix_difference_mass", check.mass.difference / (std::abs(check.mass.lhs) + scale_m),
                           1e-8, Cmp::at_most, "fixed"});
        records.push_back({"matrix_difference_stiffness",
                           check.stiffness.difference / (std::abs(check.stiffness.lhs) + scale_a), 1e-8, Cmp::at_most,
                           "fixed"});
    }
    {
        const auto sweep = norm_equivalence_sweep(mesh, options.norm_samples, options.seed, 0.05);
        records.push_back({"norm_equivalence_violations", static_cast<double>(sweep.violations), 0.0, Cmp::at_most,
                           "fixed"});
        records.push_back({"norm_equivalence_worst_ratio", sweep.worst_ratio_over_bound, 1.0 + 1e-6, Cmp::at_most,
                           "fixed"});
    }
    {
        const ManufacturedSphere sphere;
        const auto labels = mesh.nodes().flat();
        const Vector w = random_vector(rng, n);
        const Vector z = random_vector(rng, n);
        auto radial = [&](double s) -> Vector { return sphere.radius(s) * labels; };
        auto radial_rate = [&](double s) -> Vector { return sphere.radius_rate(s) * labels; };
        const auto check = check_transport(mesh, radial, radial_rate, w, z, 0.5, 1e-2);
        records.push_back({"transport_order_radial", check.observed_order, 0.9, Cmp::at_least, "fixed"});

        Vector e = random_vector(rng, 3 * n);
        e *= 0.05 * mesh.h_max() / e.lpNorm<Eigen::Infinity>();
        Vector f = random_vector(rng, 3 * n);
        f *= 0.05 * mesh.h_max() / f.lpNorm<Eigen::Infinity>();
        auto curved = [&](double s) -> Vector { return labels + s * e + s * s * f; };
        auto curved_rate = [&](double s) -> Vector { return e + 2.0 * s * f; };
        const auto deformed = check_transport(mesh, curved, curved_rate, w, z, 0.25, 0.1);
        records.push_back({"transport_order_deformed", deformed.observed_order, 0.9, Cmp::at_least, "fixed"});

        // Area rate on the radial flow: d/ds |Gamma_h| = 2 (r'/r) |Gamma_h|
        const Vector ones = Vector::Ones(n);
        const auto mesh_s = mesh.with_nodes(NodeVector(radial(0.5)));
        const double area = total_area(mesh_s);
        const double q = transport_q_form(mesh_s, radial_rate(0.5), ones, ones);
        const double expected = 2.0 * sphere.radius_rate(0.5) / sphere.radius(0.5) * area;
        records.push_back({"transport_area_rate", std::abs(q - expected) / std::abs(expected), 1e-10, Cmp::at_most,
                           "fixed"});
    }
    {
        const double area = total_area(mesh);
        records.push_back({"closed_normal_sum", area_weighted_normal_sum(mesh).norm() / area, 1e-12, Cmp::at_most,
                           "fixed"});
        const Vector ones = Vector::Ones(n);
        const double a_inf = (stiffness.cwiseAbs() * ones).maxCoeff();
        records.push_back({"stiffness_kernel", (stiffness * ones).lpNorm<Eigen::Infinity>() / a_inf, 1e-12,
                           Cmp::at_most, "fixed"});
        records.push_back(
            {"mass_total_area", std::abs(ones.dot(mass * ones) - area) / area, 1e-12, Cmp::at_most, "fixed"});

        const Vector w = random_vector(rng, 3 * n);
        const double alpha = 1.0;
        const auto norms = discrete_norms(mass, stiffness, alpha, w);
        const double k2 = norms.velocity * norms.velocity;
        const double split = norms.mass * norms.mass + alpha * norms.stiffness * norms.stiffness;
        records.push_back({"k_norm_identity", std::abs(k2 - split) / k2, 1e-13, Cmp::at_most, "fixed"});

        const auto again = assemble_mass_stiffness(mesh);
        const bool same = bitwise_equal(mass, again.mass) && bitwise_equal(stiffness, again.stiffness);
        records.push_back({"assembly_determinism", same ? 0.0 : 1.0, 0.0, Cmp::at_most, "fixed"});
    }
    {
        double worst = 0.0;
        auto previous = check_sphere_identities(2);
        for (int level = 3; level <= 5; ++level) {
            const auto current = check_sphere_identities(level);
            worst = std::max(worst, current.laplace_residual / previous.laplace_residual);
            previous = current;
        }
        records.push_back({"sphere_laplace_residual_ratio", worst, 0.6, Cmp::at_most, "fixed"});
        const auto fine = check_sphere_identities(3);
        records.push_back({"sphere_area_defect_level3", fine.area_defect, 0.02, Cmp::at_most, "fixed"});
    }
    {
        // Matrix time-derivative constant along the radial flow; recorded, not gated.
        const ManufacturedSphere sphere;
        double constant = 0.0;
        for (double t : {0.0, 0.5, 1.0}) {
            const auto mesh_t = mesh.with_nodes(NodeVector(Vector(sphere.radius(t) * mesh.nodes().flat())));
            const Vector velocity = sphere.radius_rate(t) * mesh.nodes().flat();
            const auto m_t = assemble_mass(mesh_t);
            for (int s = 0; s < 10; ++s) {
                const Vector w = random_vector(rng, n);
                const Vector z = random_vector(rng, n);
                const double value = transport_q_form(mesh_t, velocity, w, z);
                constant = std::max(constant, std::abs(value) / std::sqrt(w.dot(m_t * w) * z.dot(m_t * z)));
            }
        }
        records.push_back({"matrix_derivative_constant", constant, 1.0, Cmp::at_most, "recorded"});
    }
    return records;
}

} // namespace esfem
