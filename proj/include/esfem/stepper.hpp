#pragma once

#include <esfem/fem.hpp>
#include <esfem/linear_solver.hpp>
#include <esfem/mesh.hpp>
#include <esfem/problems.hpp>

#include <cstddef>
#include <exception>
#include <functional>
#include <optional>

namespace esfem {

/// Snapshot of the discrete system at time t. Empty w means a single species.
struct SystemState
{
    double t = 0.0;
    NodeVector x;
    Vector u;
    Vector w;
    Vector v; ///< nodal velocity, 3N

    bool has_second_species() const { return w.size() > 0; }
    /// Throws FieldLengthMismatch when field lengths disagree with x.
    void validate() const;
};

/// Which surface the normal loads g nu and N(x)u are evaluated on in the velocity solve.
enum class LoadSurface {
    old_surface, ///< x^n
    new_surface, ///< one correction sweep on the predicted x^{n+1}
};

struct StepperConfig
{
    double tau = 1e-3;
    double final_time = 1.0;
    SolverOptions solver{};
    double abort_min_angle_deg = 1.0;
    NormalCoupling normal_coupling = NormalCoupling::nodal;
    LoadSurface loads_on = LoadSurface::old_surface;
    /// Keeps the nodes fixed while still computing the velocity; used to test the velocity laws.
    bool pin_surface = false;

    void validate() const;
};

///
/// One linearly implicit Euler step of the coupled system with an elliptic velocity law:
///   (K(x^n) + tau beta I3(x)A(x^n)) x^{n+1} = K(x^n) x^n + tau (delta N(x^n) u^n + g(t^{n+1}, x^n)),
///   v^{n+1} = (x^{n+1} - x^n) / tau,
///   (M(x^{n+1}) + tau A(x^{n+1})) u^{n+1} = M(x^n) u^n + tau f(t^{n+1}, x^{n+1}, u^n),
/// and the same for w with diffusivity D_c when a second species is present.
///
/// Throws MeshDegenerated when the new mesh fails the minimum-angle threshold.
///
SystemState step_coupled(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                         const StepperConfig& config);

/// Dynamic velocity law: (M + tau alpha A)(x^n) v^{n+1} = M(x^n) v^n + tau g(t^{n+1}, x^n),
/// blockwise, then x^{n+1} = x^n + tau v^{n+1} and the PDE step.
SystemState step_dynamic(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                         const StepperConfig& config);

/// Dispatches on spec.law.kind.
SystemState step(const SurfaceMesh& topology, const SystemState& state, const ProblemSpec& spec,
                 const StepperConfig& config);

/// Called synchronously with (step index, state) after every step, and once for step 0.
using Observer = std::function<void(std::size_t, const SystemState&)>;

struct RunResult
{
    SystemState final_state; ///< last successfully computed state
    std::size_t steps_taken = 0;
    std::exception_ptr error; ///< set when the run aborted; final_state is then partial

    bool ok() const { return !error; }
    void rethrow_if_failed() const
    {
        if (error) {
            std::rethrow_exception(error);
        }
    }
};

///
/// Uniform stepping from initial.t to config.final_time. The number of steps must be an integer
/// to within 1e-9, otherwise std::invalid_argument is thrown before any step.
///
RunResult run(const ProblemSpec& spec, const SurfaceMesh& initial_mesh, const SystemState& initial,
              const StepperConfig& config, const std::vector<Observer>& observers = {});

std::size_t step_count(const StepperConfig& config, double start_time = 0.0);

} // namespace esfem
