#include <esfem/errors.hpp>
#include <esfem/fem.hpp>
#include <esfem/mesh.hpp>
#include <esfem/problems.hpp>
#include <esfem/verification.hpp>

#include <doctest.h>
#include <oracles.hpp>

#include <cmath>
#include <numbers>

using namespace esfem;

namespace {

Vector scaled_random_field(const SurfaceMesh& mesh, std::uint64_t seed, double scale)
{
    Vector e = oracle::random_vector(3 * static_cast<Eigen::Index>(mesh.num_nodes()), seed);
    return e * (scale * mesh.h_max() / e.lpNorm<Eigen::Infinity>());
}

} // namespace

TEST_CASE("Gauss-Legendre on [0, 1]")
{
    for (int n = 1; n <= 10; ++n) {
        const auto gl = gauss_legendre(n);
        REQUIRE(gl.nodes.size() == static_cast<std::size_t>(n));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double q = 0.0;
            for (int i = 0; i < n; ++i) {
                CHECK(gl.nodes[i] > 0.0);
                CHECK(gl.nodes[i] < 1.0);
                q += gl.weights[i] * std::pow(gl.nodes[i], p);
            }
            CHECK(q == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("tangential divergence")
{
    const auto mesh = generate_icosphere(2, 1.3);
    for (double d : tangential_divergence(mesh, mesh.nodes().flat())) {
        CHECK(d == doctest::Approx(2.0).epsilon(1e-12));
    }
    Vector constant(3 * static_cast<Eigen::Index>(mesh.num_nodes()));
    for (Eigen::Index j = 0; j < constant.size() / 3; ++j) {
        constant.segment<3>(3 * j) = Vec3(0.3, -1.0, 2.0);
    }
    for (double d : tangential_divergence(mesh, constant)) {
        CHECK(std::abs(d) < 1e-12);
    }
    CHECK_THROWS_AS(tangential_divergence(mesh, Vector::Zero(5)), FieldLengthMismatch);
}

TEST_CASE("matrix differences")
{
    const auto mesh = generate_icosphere(2, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const Vector w = oracle::random_vector(n, 1), z = oracle::random_vector(n, 2);

    SUBCASE("zero displacement")
    {
        const auto c = check_matrix_difference(mesh, Vector::Zero(3 * n), w, z, 8);
        CHECK(c.mass.lhs == 0.0);
        CHECK(c.mass.rhs == 0.0);
        CHECK(c.stiffness.lhs == 0.0);
        CHECK(c.stiffness.rhs == 0.0);
    }
    SUBCASE("rigid translation")
    {
        Vector e(3 * n);
        for (Eigen::Index j = 0; j < n; ++j) {
            e.segment<3>(3 * j) = Vec3(0.5, -0.25, 1.0);
        }
        const auto c = check_matrix_difference(mesh, e, w, z, 8);
        const double scale = w.norm() * z.norm();
        CHECK(std::abs(c.mass.lhs) <= 1e-13 * scale);
        CHECK(std::abs(c.stiffness.lhs) <= 1e-13 * scale);
        CHECK(std::abs(c.mass.rhs) <= 1e-12);
        CHECK(std::abs(c.stiffness.rhs) <= 1e-12);
    }
    SUBCASE("random displacement, 8 theta points")
    {
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            const Vector e = scaled_random_field(mesh, seed, 0.01);
            const auto c = check_matrix_difference(mesh, e, w, z, 8);
            const double scale = w.norm() * z.norm();
            CHECK(c.mass.difference <= 1e-8 * (std::abs(c.mass.lhs) + scale));
            CHECK(c.stiffness.difference <= 1e-8 * (std::abs(c.stiffness.lhs) + scale));
            CHECK(std::abs(c.mass.lhs) > 1e-6 * scale);
            // theta quadrature has converged: doubling the points changes nothing visible
            const auto fine = check_matrix_difference(mesh, e, w, z, 16);
            CHECK(std::abs(fine.stiffness.rhs - c.stiffness.rhs) <= 1e-12 * scale);
        }
    }
    SUBCASE("large displacement also satisfies the identity")
    {
        const Vector e = scaled_random_field(mesh, 21, 0.2);
        const auto c = check_matrix_difference(mesh, e, w, z, 8);
        CHECK(c.stiffness.difference <= 1e-8 * (std::abs(c.stiffness.lhs) + w.norm() * z.norm()));
    }
    SUBCASE("collapsing path")
    {
        const Vector e = -mesh.nodes().flat();
        CHECK_THROWS_AS(check_matrix_difference(mesh, e, w, z, 8), DegenerateIntermediateMesh);
        CHECK_THROWS_AS(check_matrix_difference(mesh, Vector::Zero(n), w, z, 8), FieldLengthMismatch);
    }
}

TEST_CASE("transport property")
{
    const auto mesh = generate_icosphere(2, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const Vector w = oracle::random_vector(n, 3), z = oracle::random_vector(n, 4);
    const NodeVector labels(Vector(mesh.nodes().flat()));
    const ManufacturedSphere sphere;

    SUBCASE("stationary path")
    {
        const auto check = check_transport(
            mesh, [&](double) { return Vector(mesh.nodes().flat()); },
            [&](double) { return Vector(Vector::Zero(3 * n)); }, w, z, 0.0, 1e-2);
        CHECK(check.exact_derivative == 0.0);
        for (double e : check.fd_errors) {
            CHECK(e == 0.0);
        }
    }
    SUBCASE("radial growth: area rate")
    {
        const double s0 = 0.3;
        const Vector velocity = sphere.radius_rate(s0) * labels.flat();
        const auto grown = mesh.with_nodes(NodeVector(Vector(sphere.radius(s0) * labels.flat())));
        const Vector ones = Vector::Ones(n);
        const double q = transport_q_form(grown, velocity, ones, ones);
        const double expected = 2.0 * sphere.radius_rate(s0) / sphere.radius(s0) * oracle::flat_area_sum(grown);
        CHECK(q == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("manufactured flow: first order difference quotients")
    {
        const auto check = check_transport(
            mesh, [&](double s) { return Vector(sphere.radius(s) * labels.flat()); },
            [&](double s) { return Vector(sphere.radius_rate(s) * labels.flat()); }, w, z, 0.5, 1e-2);
        CHECK(check.steps.size() == 3);
        CHECK(check.observed_order >= 0.9);
    }
    SUBCASE("deforming flow")
    {
        auto path = [&](double s) {
            Vector x = labels.flat();
            for (Eigen::Index j = 0; j < n; ++j) {
                x[3 * j] *= 1.0 + 0.3 * s * s;
                x[3 * j + 2] += 0.2 * s * x[3 * j + 1];
            }
            return x;
        };
        auto velocity = [&](double s) {
            Vector v = Vector::Zero(3 * n);
            for (Eigen::Index j = 0; j < n; ++j) {
                v[3 * j] = 0.6 * s * labels.flat()[3 * j];
                v[3 * j + 2] = 0.2 * labels.flat()[3 * j + 1];
            }
            return v;
        };
        const auto check = check_transport(mesh, path, velocity, w, z, 0.4, 1e-2);
        CHECK(check.observed_order >= 0.9);
        CHECK(check.fd_errors[2] < check.fd_errors[0]);
    }
}

TEST_CASE("conditional norm equivalence")
{
    const auto mesh = generate_icosphere(2, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const Vector w = oracle::random_vector(n, 5);

    const auto none = check_norm_equivalence(mesh, Vector::Zero(3 * n), w);
    CHECK(none.ratio == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(none.bound == 1.0);
    CHECK(none.mu == 0.0);

    const double eps = 0.05;
    const auto inflated = check_norm_equivalence(mesh, eps * mesh.nodes().flat(), Vector::Ones(n));
    // M((1+eps)x) = (1+eps)^2 M(x)
    CHECK(inflated.ratio == doctest::Approx(1.0 + eps).epsilon(1e-13));
    CHECK(inflated.ratio <= inflated.bound);

    const auto sweep = norm_equivalence_sweep(mesh, 100, 1, 0.01);
    CHECK(sweep.samples == 100);
    CHECK(sweep.violations == 0);
    CHECK(sweep.worst_ratio_over_bound <= 1.0);
    const auto rough = norm_equivalence_sweep(mesh, 100, 2, 0.1);
    CHECK(rough.violations == 0);
}

TEST_CASE("sphere identities")
{
    double previous_defect = 1.0;
    for (int level = 1; level <= 4; ++level) {
        const auto s = check_sphere_identities(level, 1.5);
        CHECK(s.area_defect > 0.0);
        CHECK(s.area_defect < previous_defect / 3.0);
        previous_defect = s.area_defect;
        CHECK(s.normal_sum <= 1e-12);
        const auto mesh = generate_icosphere(level, 1.5);
        const double sphere_area = 4.0 * std::numbers::pi * 2.25;
        CHECK(s.area_defect == doctest::Approx((sphere_area - oracle::flat_area_sum(mesh)) / sphere_area).epsilon(1e-9));
    }
}

TEST_CASE("verification suite")
{
    const auto records = run_verification_suite();
    REQUIRE(records.size() >= 10);
    for (const auto& r : records) {
        INFO(format_record(r));
        CHECK(r.pass());
    }
    CHECK(records.front().name == "matrix_difference_mass");

    CheckRecord pass{"x", 1e-9, 1e-8, CheckRecord::Comparison::at_most, "fixed"};
    CHECK(format_record(pass) == "CHECK x residual=1.000000e-09 bound=1.000000e-08 PASS");
    CheckRecord fail{"y", 0.5, 0.9, CheckRecord::Comparison::at_least, "fixed"};
    CHECK_FALSE(fail.pass());
    CHECK(format_record(fail) == "CHECK y residual=5.000000e-01 bound=9.000000e-01 FAIL");

    // same seed, same report
    const auto again = run_verification_suite();
    REQUIRE(again.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(again[i].residual == records[i].residual);
    }
}
