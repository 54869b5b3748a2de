#include <esfem/errors.hpp>
#include <esfem/stepper.hpp>

#include <cmath>
#include <stdexcept>

namespace esfem {

void SystemState::validate() const
{
    const auto n = static_cast<Eigen::Index>(x.num_nodes());
    if (u.size() != n) {
        throw FieldLengthMismatch("u has length " + std::to_string(u.size()) + ", expected " + std::to_string(n));
    }
    if (w.size() != 0 && w.size() != n) {
        throw FieldLengthMismatch("w has length " + std::to_string(w.size()) + ", expected " + std::to_string(n));
    }
    if (v.size() != 3 * n) {
        throw FieldLengthMismatch("v has length " + std::to_string(v.size()) + ", expected "
                                  + std::to_string(3 * n));
    }
}

void StepperConfig::validate() const
{
    if (!(tau > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    if (!(final_time >= tau * (1.0 - 1e-12))) {
        throw std::invalid_argument("final time must be at least one time step");
    }
    if (!(solver.cg_tolerance > 0.0) || solver.cg_max_iterations <= 0) {
        throw std::invalid_argument("invalid conjugate gradient settings");
    }
}

std::size_t step_count(const StepperConfig& config, double start_time)
{
    config.validate();
    const double ratio = (config.final_time - start_time) / config.tau;
    const double rounded = std::round(ratio);
    if (rounded < 0.0 || std::abs(ratio - rounded) > 1e-9) {
        throw std::invalid_argument("(T - t0) / tau = " + std::to_string(ratio) + " is not an integer");
    }
    return static_cast<std::size_t>(rounded);
}

namespace {

SurfaceMesh checked_mesh(const SurfaceMesh& topology, const NodeVector& x, double time, const StepperConfig& config)
{
    auto mesh = topology.with_nodes(x);
    const auto quality = mesh_quality(mesh);
    if (!(quality.min_angle_deg >= config.abort_min_angle_deg)) {
        throw MeshDegenerated(time, quality.min_angle_deg);
    }
    return mesh;
}

/// delta N(x) u + g-load(t, x) on the given surface.
Vector normal_forcing(const SurfaceMesh& mesh, const SystemState& state, const ProblemSpec& spec, double time,
                      const StepperConfig& config)
{
    Vector rhs = Vector::Zero(3 * static_cast<Eigen::Index>(mesh.num_nodes()));
    if (spec.law.delta != 0.0) {
        rhs += spec.law.delta * assemble_normal_coupling(mesh, state.u, config.normal_coupling);
    }
    if (spec.velocity_forcing) {
        const auto& g = spec.velocity_forcing;
        rhs += assemble_normal_load(mesh, state.u, time,
                                    [&g](const Vec3& x, double, const Vec3&, double t) { return g(t, x); });
    }
    return rhs;
}

/// Transported PDE step on the new surface, in increment form.
void require_matching_species(const SystemState& state, const ProblemSpec& spec)
{
    if (state.has_second_species() != spec.second_species.has_value()) {
        throw std::invalid_argument(spec.second_species ? "the problem has two species but the state carries only u"
                                                        : "the state carries w but the problem has a single species");
    }
}

void advance_species(const SurfaceMesh& new_mesh, const MassStiffness& old_matrices, const SystemState& state,
                     const ProblemSpec& spec, double time, const StepperConfig& config, SystemState& next)
{
    const double tau = config.tau;
    const auto new_matrices = assemble_mass_stiffness(new_mesh);
    const auto& m1 = new_matrices.mass;
    const auto& a1 = new_matrices.stiffness;

    Vector load_u = Vector::Zero(state.u.size());
    if (spec.pde_forcing) {
        const auto& f = spec.pde_forcing;
        load_u += assemble_scalar_load(new_mesh, state.u, time,
                                       [&f](const Vec3& x, double value, const Vec3& gradient, double t) {
                                           return f(t, x, value, gradient);
                                       });
    }
    if (spec.second_species) {
        const auto& kinetics = *spec.second_species;
        load_u += assemble_reaction_load(new_mesh, state.u, state.w,
                                         [&kinetics](double uh, double wh) { return kinetics(uh, wh).first; });
    }

    // (M1 + tau A1) du = M0 u - M1 u - tau A1 u + tau F
    const SparseMatrix system_u = m1 + tau * a1;
    const Vector rhs_u = old_matrices.mass * state.u - m1 * state.u - tau * (a1 * state.u) + tau * load_u;
    next.u = state.u + SymmetricSolver(system_u, config.solver).solve(rhs_u);

    if (spec.second_species) {
        const auto& kinetics = *spec.second_species;
        const Vector load_w = assemble_reaction_load(
            new_mesh, state.u, state.w, [&kinetics](double uh, double wh) { return kinetics(uh, wh).second; });
        const double d = kinetics.diffusivity;
        const SparseMatrix system_w = m1 + (tau * d) * a1;
        const Vector rhs_w =
            old_matrices.mass * state.w - m1 * state.w - (tau * d) * (a1 * state.w) + tau * load_w;
        next.w = state.w + SymmetricSolver(system_w, config.solver).solve(rhs_w);
    } else {
        next.w = Vector();
    }
}

} // namespace

SystemState step_coupled(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                         const StepperConfig& config)
{
    state.validate();
    require_matching_species(state, spec);
    if (spec.law.kind == VelocityLaw::Kind::dynamic) {
        throw std::invalid_argument("step_coupled needs an elliptic or MCF velocity law");
    }
    spec.law.validate();
    const double tau = config.tau;
    const double t1 = state.t + tau;
    const auto& law = spec.law;

    const SurfaceMesh mesh0 = topology.with_nodes(state.x);
    const auto matrices = assemble_mass_stiffness(mesh0);

    // (K + tau beta A) dx = tau (delta N u + g) - tau beta A x
    const SparseMatrix system = matrices.mass + (law.alpha + tau * law.beta) * matrices.stiffness;
    const SymmetricSolver solver(system, config.solver);
    Vector mcf_term = Vector::Zero(state.x.flat().size());
    if (law.beta != 0.0) {
        mcf_term = (tau * law.beta) * apply_blockwise(matrices.stiffness, state.x.flat());
    }
    Vector dx = solver.solve_blockwise(tau * normal_forcing(mesh0, state, spec, t1, config) - mcf_term);
    if (config.loads_on == LoadSurface::new_surface) {
        const SurfaceMesh predicted = topology.with_nodes(NodeVector(Vector(state.x.flat() + dx)));
        dx = solver.solve_blockwise(tau * normal_forcing(predicted, state, spec, t1, config) - mcf_term);
    }

    SystemState next;
    next.t = t1;
    next.v = dx / tau;
    next.x = config.pin_surface ? state.x : NodeVector(Vector(state.x.flat() + dx));

    const SurfaceMesh mesh1 = checked_mesh(topology, next.x, t1, config);
    advance_species(mesh1, matrices, state, spec, t1, config, next);
    return next;
}

SystemState step_dynamic(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                         const StepperConfig& config)
{
    state.validate();
    require_matching_species(state, spec);
    if (spec.law.kind != VelocityLaw::Kind::dynamic) {
        throw std::invalid_argument("step_dynamic needs the dynamic velocity law");
    }
    spec.law.validate();
    const double tau = config.tau;
    const double t1 = state.t + tau;
    const double alpha = spec.law.alpha;

    const SurfaceMesh mesh0 = topology.with_nodes(state.x);
    const auto matrices = assemble_mass_stiffness(mesh0);

    // (M + tau alpha A) dv = tau (g - alpha A v)
    const SparseMatrix system = matrices.mass + (tau * alpha) * matrices.stiffness;
    const Vector rhs =
        tau * normal_forcing(mesh0, state, spec, t1, config) - (tau * alpha) * apply_blockwise(matrices.stiffness, state.v);
    const Vector dv = SymmetricSolver(system, config.solver).solve_blockwise(rhs);

    SystemState next;
    next.t = t1;
    next.v = state.v + dv;
    next.x = config.pin_surface ? state.x : NodeVector(Vector(state.x.flat() + tau * next.v));

    const SurfaceMesh mesh1 = checked_mesh(topology, next.x, t1, config);
    advance_species(mesh1, matrices, state, spec, t1, config, next);
    return next;
}

SystemState step(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                 const StepperConfig& config)
{
    if (spec.law.kind == VelocityLaw::Kind::dynamic) {
        return step_dynamic(topology, state, spec, config);
    }
    return step_coupled(topology, state, spec, config);
}

RunResult run(const ProblemSpec& spec, const SurfaceMesh& initial_mesh, const SystemState& initial,
              const StepperConfig& config, const std::vector<Observer>& observers)
{
    const std::size_t steps = step_count(config, initial.t);
    initial.validate();
    if (initial.x.num_nodes() != initial_mesh.num_nodes()) {
        throw FieldLengthMismatch("initial state and mesh disagree on the node count");
    }

    RunResult result;
    result.final_state = initial;
    for (const auto& observer : observers) {
        observer(0, result.final_state);
    }
    for (std::size_t n = 1; n <= steps; ++n) {
        try {
            SystemState next = step(initial_mesh, result.final_state, spec, config);
            // Uniform grid times, not accumulated sums.
            next.t = initial.t + static_cast<double>(n) * config.tau;
            result.final_state = std::move(next);
        } catch (const Error&) {
            result.error = std::current_exception();
            break;
        }
        result.steps_taken = n;
        for (const auto& observer : observers) {
            observer(n, result.final_state);
        }
    }
    return result;
}

} // namespace esfem
