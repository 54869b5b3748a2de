#pragma once

#include <esfem/linear_solver.hpp>
#include <esfem/mesh.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

namespace esfem {

///
/// Velocity law  v - alpha Lap v - beta Lap X = (delta u + g) nu  (elliptic and MCF variants),
/// or the dynamic law  d/dt(M v) + alpha A v = g  (Dynamic).
///
struct VelocityLaw
{
    enum class Kind { regularized_elliptic, regularized_mcf, dynamic };

    Kind kind = Kind::regularized_elliptic;
    double alpha = 1.0;
    double beta = 0.0;
    double delta = 0.0;

    /// Throws std::invalid_argument for negative weights or an unregularized elliptic law.
    void validate() const;
};

///
/// Radially growing sphere X(p,t) = r(t) p with logistic radius, carrying u = X1 X2 exp(-6t).
///
struct ManufacturedSphere
{
    double r0 = 1.0;
    double rK = 2.0;
    double k = 0.5;

    double radius(double t) const;
    /// k r (1 - r/rK)
    double radius_rate(double t) const;

    struct Exact
    {
        Vec3 position;
        double u = 0.0;
        Vec3 velocity;
    };

    /// Exact flow, solution and velocity at the unit-sphere label p.
    Exact solution(const Vec3& label, double t) const;

    /// u(X, t) = X1 X2 exp(-6t)
    static double field(const Vec3& position, double t);

    struct Forcing
    {
        double f = 0.0; ///< right-hand side of the surface PDE
        double g = 0.0; ///< scalar normal forcing of the velocity law
    };

    ///
    /// Manufactured forcing making (X, u) an exact solution:
    ///   f = (4 r'/r - 6 + 6/r^2) u,   g = r' + 2 alpha r'/r^2 + 2 beta/r - delta u.
    /// Throws OffSurface unless |X| = r(t) to 1e-6 relative.
    ///
    Forcing forcing(double t, const Vec3& position, const VelocityLaw& law) const;

    void validate() const;
};

/// Schnakenberg kinetics f1 = gamma (a - u + u^2 w), f2 = gamma (b - u^2 w).
struct TumorKinetics
{
    double diffusivity = 10.0; ///< D_c, diffusivity of the second species
    double gamma = 100.0;
    double a = 0.1;
    double b = 0.9;

    std::pair<double, double> operator()(double u, double w) const
    {
        const double u2w = u * u * w;
        return {gamma * (a - u + u2w), gamma * (b - u2w)};
    }

    std::pair<double, double> steady_state() const { return {a + b, b / ((a + b) * (a + b))}; }

    void validate() const;
};

using PdeForcing = std::function<double(double t, const Vec3& x, double u, const Vec3& grad_u)>;
using VelocityForcing = std::function<double(double t, const Vec3& x)>;

/// A complete coupled system. Empty forcing handles mean zero forcing.
struct ProblemSpec
{
    VelocityLaw law;
    PdeForcing pde_forcing;
    VelocityForcing velocity_forcing;
    std::optional<TumorKinetics> second_species;
    std::optional<ManufacturedSphere> exact;
};

/// Coupled PDE and velocity law with manufactured forcing; the forcing handles evaluate at the
/// radial projection of the query point onto the exact sphere.
ProblemSpec manufactured_problem(const ManufacturedSphere& sphere, const VelocityLaw& law);

/// Two-species reaction-diffusion driving the surface through delta u nu.
ProblemSpec tumor_problem(const TumorKinetics& kinetics, const VelocityLaw& law);

struct TumorInitialOptions
{
    std::uint64_t seed = 0;
    double perturbation_bound = 0.01;
    double pre_time = 5.0;
    double tau_pre = 1e-3;
    SolverOptions solver{};
};

///
/// Perturbs the steady state by i.i.d. uniform [0, bound] values per node and species, then
/// evolves the reaction-diffusion system on the fixed surface to pre_time.
///
std::pair<Vector, Vector> tumor_initial_data(const SurfaceMesh& mesh, const TumorKinetics& kinetics,
                                             const TumorInitialOptions& options);

} // namespace esfem
