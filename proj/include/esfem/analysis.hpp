#pragma once

#include <esfem/mesh.hpp>
#include <esfem/problems.hpp>
#include <esfem/stepper.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace esfem {

/// Unit-sphere labels p_j = x_j / |x_j| of an initial sphere mesh.
NodeVector sphere_labels(const SurfaceMesh& initial_mesh);

/// Exact positions, solution and velocity at the labelled nodes.
struct ExactNodal
{
    NodeVector x;
    Vector u;
    Vector v;
};

/// Throws MissingExactSolution when spec.exact is empty.
ExactNodal interpolated_exact(const ProblemSpec& spec, const NodeVector& labels, double t);

/// State at t = 0 taken from the exact solution at the nodes.
SystemState exact_initial_state(const ProblemSpec& spec, const SurfaceMesh& initial_mesh);

/// Error norms of one trajectory, all measured on the interpolated surface Gamma*_h(t).
struct TrajectoryErrors
{
    double u_LinfL2 = 0.0;
    double u_L2H1 = 0.0;
    double v_LinfL2 = 0.0;
    double v_LinfH1 = 0.0;
    double x_LinfH1 = 0.0;
    double h_final = 0.0; ///< h_max of the numerical mesh at the last snapshot
    std::size_t snapshots = 0;
};

///
/// Streaming evaluation of the error norms: feed every snapshot in time order.
/// The sup norms take the max over snapshots, the L2-in-time norm uses the right-endpoint
/// rectangle rule on the snapshot times.
///
class ErrorAccumulator
{
public:
    ErrorAccumulator(ProblemSpec spec, SurfaceMesh initial_mesh);

    void observe(const SystemState& state);
    Observer observer();

    /// Throws EmptyTrajectory before the first snapshot.
    TrajectoryErrors result() const;

private:
    ProblemSpec m_spec;
    SurfaceMesh m_topology;
    NodeVector m_labels;
    TrajectoryErrors m_errors;
    double m_l2_time_sum = 0.0;
    double m_last_time = 0.0;
};

TrajectoryErrors error_norms(std::span<const SystemState> trajectory, const ProblemSpec& spec,
                             const SurfaceMesh& initial_mesh);

/// log(E_{k-1}/E_k) / log(h_{k-1}/h_k) per consecutive pair. Throws DomainError on
/// non-positive entries and std::invalid_argument on bad lengths.
std::vector<double> compute_eoc(std::span<const double> errors, std::span<const double> h_values);

struct ErrorReport
{
    struct Level
    {
        int level = 0;
        std::size_t dof = 0;
        double h = 0.0;
        TrajectoryErrors errors;
    };
    std::vector<Level> levels;
};

/// CSV with header level,dof,h,err_u_LinfL2,eoc_u_LinfL2,... and 7 significant digits.
void emit_table(const ErrorReport& report, const std::filesystem::path& path);

/// Velocity L2 table: level,dof,h,err_v_LinfL2,eoc_v_LinfL2.
void emit_velocity_table(const ErrorReport& report, const std::filesystem::path& path);

/// Column of the report by name (e.g. "err_u_LinfL2") in level order.
std::vector<double> report_column(const ErrorReport& report, const std::string& name);

} // namespace esfem
