#include <esfem/errors.hpp>
#include <esfem/fem.hpp>
#include <esfem/problems.hpp>
#include <esfem/rng.hpp>

#include <cmath>
#include <stdexcept>

namespace esfem {

void VelocityLaw::validate() const
{
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw std::invalid_argument("velocity law weights alpha and beta must be non-negative");
    }
    if (!std::isfinite(delta)) {
        throw std::invalid_argument("velocity law coupling delta must be finite");
    }
    if (kind != Kind::dynamic && alpha == 0.0 && beta == 0.0) {
        throw std::invalid_argument("regularized velocity law needs alpha > 0 or beta > 0");
    }
}

void ManufacturedSphere::validate() const
{
    if (!(r0 > 0.0) || !(rK > 0.0) || !(k > 0.0)) {
        throw std::invalid_argument("manufactured sphere needs r0, rK, k > 0");
    }
}

double ManufacturedSphere::radius(double t) const
{
    const double decay = std::exp(-k * t);
    return r0 * rK / (rK * decay + r0 * (1.0 - decay));
}

double ManufacturedSphere::radius_rate(double t) const
{
    const double r = radius(t);
    return k * r * (1.0 - r / rK);
}

double ManufacturedSphere::field(const Vec3& position, double t)
{
    return position.x() * position.y() * std::exp(-6.0 * t);
}

ManufacturedSphere::Exact ManufacturedSphere::solution(const Vec3& label, double t) const
{
    Exact exact;
    exact.position = radius(t) * label;
    exact.u = field(exact.position, t);
    exact.velocity = radius_rate(t) * label;
    return exact;
}

ManufacturedSphere::Forcing ManufacturedSphere::forcing(double t, const Vec3& position, const VelocityLaw& law) const
{
    const double r = radius(t);
    if (std::abs(position.norm() - r) > 1e-6 * r) {
        throw OffSurface("point at distance " + std::to_string(position.norm()) + " is not on the sphere of radius "
                         + std::to_string(r));
    }
    const double rate = radius_rate(t);
    const double u = field(position, t);
    Forcing out;
    out.f = (4.0 * rate / r - 6.0 + 6.0 / (r * r)) * u;
    out.g = rate + 2.0 * law.alpha * rate / (r * r) + 2.0 * law.beta / r - law.delta * u;
    return out;
}

void TumorKinetics::validate() const
{
    if (!(diffusivity > 0.0) || !(gamma > 0.0) || !(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("tumor kinetics parameters must be positive");
    }
}

ProblemSpec manufactured_problem(const ManufacturedSphere& sphere, const VelocityLaw& law)
{
    sphere.validate();
    law.validate();
    auto project = [sphere](double t, const Vec3& x) -> Vec3 { return sphere.radius(t) * x.normalized(); };

    ProblemSpec spec;
    spec.law = law;
    spec.exact = sphere;
    spec.pde_forcing = [sphere, law, project](double t, const Vec3& x, double, const Vec3&) {
        return sphere.forcing(t, project(t, x), law).f;
    };
    spec.velocity_forcing = [sphere, law, project](double t, const Vec3& x) {
        return sphere.forcing(t, project(t, x), law).g;
    };
    return spec;
}

ProblemSpec tumor_problem(const TumorKinetics& kinetics, const VelocityLaw& law)
{
    kinetics.validate();
    law.validate();
    ProblemSpec spec;
    spec.law = law;
    spec.second_species = kinetics;
    return spec;
}

std::pair<Vector, Vector> tumor_initial_data(const SurfaceMesh& mesh, const TumorKinetics& kinetics,
                                             const TumorInitialOptions& options)
{
    kinetics.validate();
    if (!(options.tau_pre > 0.0) || !(options.pre_time >= 0.0) || !(options.perturbation_bound >= 0.0)) {
        throw std::invalid_argument("invalid tumor pre-solve options");
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const auto [u_star, w_star] = kinetics.steady_state();

    CounterRng rng_u(options.seed, 0);
    CounterRng rng_w(options.seed, 1);
    Vector u(n);
    Vector w(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        u[j] = u_star + rng_u.uniform(0.0, options.perturbation_bound);
        w[j] = w_star + rng_w.uniform(0.0, options.perturbation_bound);
    }

    const auto steps = static_cast<long>(std::llround(options.pre_time / options.tau_pre));
    if (steps == 0) {
        return {u, w};
    }
    const double tau = options.tau_pre;
    const auto [mass, stiffness] = assemble_mass_stiffness(mesh);
    const SparseMatrix system_u = mass + tau * stiffness;
    const SparseMatrix system_w = mass + (tau * kinetics.diffusivity) * stiffness;
    const SymmetricSolver solve_u(system_u, options.solver);
    const SymmetricSolver solve_w(system_w, options.solver);

    for (long step = 0; step < steps; ++step) {
        const Vector f1 = assemble_reaction_load(mesh, u, w, [&](double uh, double wh) { return kinetics(uh, wh).first; });
        const Vector f2 = assemble_reaction_load(mesh, u, w, [&](double uh, double wh) { return kinetics(uh, wh).second; });
        // Increment form: the steady state is reproduced to rounding.
        const Vector du = solve_u.solve(tau * (f1 - stiffness * u));
        const Vector dw = solve_w.solve(tau * (f2 - kinetics.diffusivity * (stiffness * w)));
        u += du;
        w += dw;
    }
    return {u, w};
}

} // namespace esfem
