#include <esfem/errors.hpp>
#include <esfem/fem.hpp>
#include <esfem/mesh.hpp>
#include <esfem/problems.hpp>
#include <esfem/stepper.hpp>

#include <doctest.h>
#include <oracles.hpp>

#include <cmath>

using namespace esfem;

namespace {

VelocityLaw elliptic(double alpha, double delta = 0.0)
{
    VelocityLaw law;
    law.alpha = alpha;
    law.delta = delta;
    return law;
}

VelocityLaw dynamic(double alpha)
{
    VelocityLaw law;
    law.kind = VelocityLaw::Kind::dynamic;
    law.alpha = alpha;
    return law;
}

SystemState initial_state(const SurfaceMesh& mesh, Vector u, bool second_species = false)
{
    SystemState s;
    s.x = mesh.nodes();
    s.u = std::move(u);
    if (second_species) {
        s.w = s.u.reverse();
    }
    s.v = Vector::Zero(3 * static_cast<Eigen::Index>(mesh.num_nodes()));
    return s;
}

StepperConfig config_of(double tau, double final_time)
{
    StepperConfig c;
    c.tau = tau;
    c.final_time = final_time;
    return c;
}

double total_mass(const SurfaceMesh& topology, const NodeVector& x, const Vector& u)
{
    const auto mesh = topology.with_nodes(x);
    return Vector::Ones(u.size()).dot(assemble_mass(mesh) * u);
}

} // namespace

TEST_CASE("no forcing and no coupling: the surface stays put")
{
    const auto mesh = generate_icosphere(2, 1.0);
    ProblemSpec spec;
    spec.law = elliptic(1.0);
    const auto s0 = initial_state(mesh, oracle::random_vector(static_cast<Eigen::Index>(mesh.num_nodes()), 1));
    const auto s1 = step_coupled(mesh, s0, spec, config_of(0.01, 1.0));
    CHECK(s1.x.flat() == s0.x.flat());
    CHECK(s1.v.isZero(0.0));
    CHECK(s1.t == doctest::Approx(0.01));
}

TEST_CASE("discrete mass of u is transported exactly")
{
    const auto mesh = generate_icosphere(2, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const Vector u0 = oracle::random_vector(n, 2, 0.5, 1.5);

    SUBCASE("static surface")
    {
        ProblemSpec spec;
        spec.law = elliptic(1.0);
        auto state = initial_state(mesh, u0);
        const double m0 = total_mass(mesh, state.x, state.u);
        for (int i = 0; i < 10; ++i) {
            state = step(mesh, state, spec, config_of(0.05, 1.0));
        }
        CHECK(total_mass(mesh, state.x, state.u) == doctest::Approx(m0).epsilon(1e-12));
    }
    SUBCASE("surface driven by u")
    {
        ProblemSpec spec;
        spec.law = elliptic(1.0, 0.4);
        auto state = initial_state(mesh, u0);
        const double m0 = total_mass(mesh, state.x, state.u);
        const double a0 = total_area(mesh);
        for (int i = 0; i < 10; ++i) {
            state = step(mesh, state, spec, config_of(0.05, 1.0));
        }
        CHECK(total_area(mesh.with_nodes(state.x)) > 1.05 * a0);
        CHECK(total_mass(mesh, state.x, state.u) == doctest::Approx(m0).epsilon(1e-12));
    }
}

TEST_CASE("one manufactured step moves the nodes outward to the exact radius")
{
    const ManufacturedSphere sphere;
    VelocityLaw law = elliptic(1.0, 0.4);
    const auto spec = manufactured_problem(sphere, law);
    const double tau = 1e-3;
    for (int level : {1, 2, 3}) {
        const auto mesh = generate_icosphere(level, 1.0);
        SystemState s0 = initial_state(mesh, Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes())));
        for (std::size_t j = 0; j < mesh.num_nodes(); ++j) {
            s0.u[static_cast<Eigen::Index>(j)] = ManufacturedSphere::field(mesh.nodes().node(j), 0.0);
        }
        const auto s1 = step_coupled(mesh, s0, spec, config_of(tau, 1.0));
        double worst = 0.0;
        for (std::size_t j = 0; j < mesh.num_nodes(); ++j) {
            const double r = s1.x.node(j).norm();
            CHECK(r > 1.0);
            worst = std::max(worst, std::abs(r - sphere.radius(tau)));
        }
        // C recorded on the first run: 3.3e-5 (level 1), 3.6e-5 (level 2), 4.7e-5 (level 3)
        const double h = mesh.h_max();
        CHECK(worst <= 1e-4 * (tau * tau + h * h));
    }
}

TEST_CASE("dynamic law")
{
    const auto mesh = generate_icosphere(2, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    ProblemSpec spec;
    spec.law = dynamic(1.0);

    SUBCASE("no forcing, no velocity: frozen")
    {
        auto state = initial_state(mesh, Vector::Ones(n));
        const auto x0 = state.x.flat();
        for (int i = 0; i < 5; ++i) {
            state = step_dynamic(mesh, state, spec, config_of(0.1, 1.0));
        }
        CHECK(state.x.flat() == x0);
        CHECK(state.v.isZero(0.0));
        CHECK((state.u.array() - 1.0).abs().maxCoeff() < 1e-13);
    }
    SUBCASE("no forcing: the mass norm of v does not grow on a pinned surface")
    {
        auto state = initial_state(mesh, Vector::Ones(n));
        state.v = oracle::random_vector(3 * n, 4);
        auto cfg = config_of(0.05, 1.0);
        cfg.pin_surface = true;
        const SparseMatrix M = assemble_mass(mesh);
        double previous = quadratic_form(M, state.v);
        for (int i = 0; i < 20; ++i) {
            state = step_dynamic(mesh, state, spec, cfg);
            const double now = quadratic_form(M, state.v);
            CHECK(now <= previous * (1.0 + 1e-14));
            previous = now;
        }
    }
    SUBCASE("constant forcing on a pinned surface converges to the stationary law")
    {
        spec.velocity_forcing = [](double, const Vec3&) { return 0.7; };
        auto state = initial_state(mesh, Vector::Ones(n));
        auto cfg = config_of(1.0, 200.0);
        cfg.pin_surface = true;
        for (int i = 0; i < 100; ++i) {
            state = step_dynamic(mesh, state, spec, cfg);
        }
        const auto [M, A] = assemble_mass_stiffness(mesh);
        const Vector load = assemble_normal_load(mesh, state.u, state.t,
                                                 [](const Vec3&, double, const Vec3&, double) { return 0.7; });
        // No zeroth-order term in the dynamic law: the fixed point solves alpha A v = load.
        const Vector residual = apply_blockwise(A, state.v) - load;
        CHECK(residual.norm() <= 1e-10 * load.norm());
    }
    SUBCASE("law kinds are checked")
    {
        const auto state = initial_state(mesh, Vector::Ones(n));
        CHECK_THROWS_AS(step_coupled(mesh, state, spec, config_of(0.1, 1.0)), std::invalid_argument);
        ProblemSpec other;
        other.law = elliptic(1.0);
        CHECK_THROWS_AS(step_dynamic(mesh, state, other, config_of(0.1, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("run: uniform times, observers and partial results")
{
    const auto mesh = generate_icosphere(1, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    ProblemSpec spec;
    spec.law = elliptic(1.0, 0.4);

    std::vector<double> times;
    std::vector<std::size_t> indices;
    const auto result = run(spec, mesh, initial_state(mesh, Vector::Ones(n)), config_of(0.1, 1.0),
                            {[&](std::size_t k, const SystemState& s) {
                                indices.push_back(k);
                                times.push_back(s.t);
                            }});
    CHECK(result.ok());
    CHECK(result.steps_taken == 10);
    REQUIRE(times.size() == 11);
    for (std::size_t k = 0; k <= 10; ++k) {
        CHECK(indices[k] == k);
        CHECK(times[k] == static_cast<double>(k) * 0.1);
    }
    CHECK(result.final_state.t == 1.0);

    SUBCASE("mesh degeneration aborts with the failure time")
    {
        auto cfg = config_of(0.1, 1.0);
        cfg.abort_min_angle_deg = 59.0;
        const auto failed = run(spec, mesh, initial_state(mesh, Vector::Ones(n)), cfg);
        CHECK_FALSE(failed.ok());
        CHECK(failed.steps_taken == 0);
        CHECK(failed.final_state.t == 0.0);
        try {
            failed.rethrow_if_failed();
            FAIL("expected MeshDegenerated");
        } catch (const MeshDegenerated& e) {
            CHECK(e.time() == doctest::Approx(0.1));
        }
    }
}

TEST_CASE("configuration and state validation")
{
    const auto mesh = generate_icosphere(1, 1.0);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    ProblemSpec spec;
    spec.law = elliptic(1.0);
    const auto good = initial_state(mesh, Vector::Ones(n));

    CHECK_THROWS_AS(config_of(0.0, 1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(config_of(0.5, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(run(spec, mesh, good, config_of(0.3, 1.0)), std::invalid_argument);
    CHECK(step_count(config_of(0.1, 1.0)) == 10);
    CHECK(step_count(config_of(0.1, 1.0), 0.5) == 5);

    auto bad = good;
    bad.u = Vector::Ones(n - 1);
    CHECK_THROWS_AS(bad.validate(), FieldLengthMismatch);
    bad = good;
    bad.v = Vector::Zero(n);
    CHECK_THROWS_AS(step(mesh, bad, spec, config_of(0.1, 1.0)), FieldLengthMismatch);
    bad = good;
    bad.w = Vector::Ones(2);
    CHECK_THROWS_AS(bad.validate(), FieldLengthMismatch);

    const auto two = initial_state(mesh, Vector::Ones(n), true);
    CHECK_THROWS_AS(step(mesh, two, spec, config_of(0.1, 1.0)), std::invalid_argument);
    ProblemSpec tumor = tumor_problem(TumorKinetics{}, elliptic(0.01, 0.1));
    CHECK_THROWS_AS(step(mesh, good, tumor, config_of(0.1, 1.0)), std::invalid_argument);
    CHECK_NOTHROW(step(mesh, two, tumor, config_of(1e-3, 1.0)));

    const auto other = generate_icosphere(2, 1.0);
    CHECK_THROWS_AS(run(spec, other, good, config_of(0.1, 1.0)), FieldLengthMismatch);
}

TEST_CASE("variants of the velocity solve agree to first order")
{
    const ManufacturedSphere sphere;
    const auto spec = manufactured_problem(sphere, elliptic(1.0, 0.4));
    const auto mesh = generate_icosphere(2, 1.0);
    SystemState s0 = initial_state(mesh, Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes())));
    for (std::size_t j = 0; j < mesh.num_nodes(); ++j) {
        s0.u[static_cast<Eigen::Index>(j)] = ManufacturedSphere::field(mesh.nodes().node(j), 0.0);
    }
    auto cfg = config_of(1e-2, 1.0);
    const auto base = step_coupled(mesh, s0, spec, cfg);
    cfg.loads_on = LoadSurface::new_surface;
    const auto corrected = step_coupled(mesh, s0, spec, cfg);
    cfg.loads_on = LoadSurface::old_surface;
    cfg.normal_coupling = NormalCoupling::interpolated;
    const auto interpolated = step_coupled(mesh, s0, spec, cfg);
    cfg.normal_coupling = NormalCoupling::nodal;
    cfg.solver.kind = SolverKind::conjugate_gradient;
    const auto cg = step_coupled(mesh, s0, spec, cfg);

    const double scale = base.v.norm();
    CHECK((corrected.v - base.v).norm() < 0.05 * scale);
    CHECK((corrected.v - base.v).norm() > 0.0);
    CHECK((interpolated.v - base.v).norm() < 0.05 * scale);
    CHECK((cg.v - base.v).norm() < 1e-9 * scale);
    CHECK((cg.u - base.u).norm() < 1e-9 * base.u.norm());
}
