#include <esfem/analysis.hpp>
#include <esfem/errors.hpp>
#include <esfem/fem.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace esfem {

NodeVector sphere_labels(const SurfaceMesh& initial_mesh)
{
    NodeVector labels(initial_mesh.num_nodes());
    for (std::size_t j = 0; j < initial_mesh.num_nodes(); ++j) {
        labels.set_node(j, initial_mesh.nodes().node(j).normalized());
    }
    return labels;
}

ExactNodal interpolated_exact(const ProblemSpec& spec, const NodeVector& labels, double t)
{
    if (!spec.exact) {
        throw MissingExactSolution();
    }
    const auto n = labels.num_nodes();
    ExactNodal out{NodeVector(n), Vector(static_cast<Eigen::Index>(n)), Vector(3 * static_cast<Eigen::Index>(n))};
    for (std::size_t j = 0; j < n; ++j) {
        const auto exact = spec.exact->solution(labels.node(j), t);
        out.x.set_node(j, exact.position);
        out.u[static_cast<Eigen::Index>(j)] = exact.u;
        out.v.segment<3>(3 * static_cast<Eigen::Index>(j)) = exact.velocity;
    }
    return out;
}

SystemState exact_initial_state(const ProblemSpec& spec, const SurfaceMesh& initial_mesh)
{
    auto exact = interpolated_exact(spec, sphere_labels(initial_mesh), 0.0);
    SystemState state;
    state.t = 0.0;
    // The mesh nodes are the exact nodes at t = 0; keep them bit-identical.
    state.x = initial_mesh.nodes();
    state.u = std::move(exact.u);
    state.v = std::move(exact.v);
    return state;
}

ErrorAccumulator::ErrorAccumulator(ProblemSpec spec, SurfaceMesh initial_mesh)
    : m_spec(std::move(spec))
    , m_topology(std::move(initial_mesh))
    , m_labels(sphere_labels(m_topology))
{
    if (!m_spec.exact) {
        throw MissingExactSolution();
    }
}

void ErrorAccumulator::observe(const SystemState& state)
{
    const auto exact = interpolated_exact(m_spec, m_labels, state.t);
    const auto star_mesh = m_topology.with_nodes(exact.x);
    const auto [mass, stiffness] = assemble_mass_stiffness(star_mesh);

    const Vector eu = state.u - exact.u;
    const Vector ev = state.v - exact.v;
    const Vector ex = state.x.flat() - exact.x.flat();

    const auto nu = discrete_norms(mass, stiffness, 1.0, eu);
    const auto nv = discrete_norms(mass, stiffness, 1.0, ev);
    const auto nx = discrete_norms(mass, stiffness, 1.0, ex);

    m_errors.u_LinfL2 = std::max(m_errors.u_LinfL2, nu.mass);
    m_errors.v_LinfL2 = std::max(m_errors.v_LinfL2, nv.mass);
    // ||.||_K with alpha = 1 is the discrete H1 norm
    m_errors.v_LinfH1 = std::max(m_errors.v_LinfH1, nv.velocity);
    m_errors.x_LinfH1 = std::max(m_errors.x_LinfH1, nx.velocity);
    if (m_errors.snapshots > 0) {
        m_l2_time_sum += (state.t - m_last_time) * nu.velocity * nu.velocity;
    }
    m_errors.u_L2H1 = std::sqrt(m_l2_time_sum);
    m_last_time = state.t;
    m_errors.h_final = m_topology.with_nodes(state.x).h_max();
    ++m_errors.snapshots;
}

Observer ErrorAccumulator::observer()
{
    return [this](std::size_t, const SystemState& state) { observe(state); };
}

TrajectoryErrors ErrorAccumulator::result() const
{
    if (m_errors.snapshots == 0) {
        throw EmptyTrajectory();
    }
    return m_errors;
}

TrajectoryErrors error_norms(std::span<const SystemState> trajectory, const ProblemSpec& spec,
                             const SurfaceMesh& initial_mesh)
{
    if (trajectory.empty()) {
        throw EmptyTrajectory();
    }
    ErrorAccumulator acc(spec, initial_mesh);
    for (const auto& state : trajectory) {
        acc.observe(state);
    }
    return acc.result();
}

std::vector<double> compute_eoc(std::span<const double> errors, std::span<const double> h_values)
{
    if (errors.size() != h_values.size() || errors.size() < 2) {
        throw std::invalid_argument("EOC needs two equal-length sequences of length >= 2");
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!(errors[k] > 0.0) || !(h_values[k] > 0.0)) {
            throw DomainError("EOC inputs must be positive");
        }
    }
    std::vector<double> eoc;
    eoc.reserve(errors.size() - 1);
    for (std::size_t k = 1; k < errors.size(); ++k) {
        eoc.push_back(std::log(errors[k - 1] / errors[k]) / std::log(h_values[k - 1] / h_values[k]));
    }
    return eoc;
}

std::vector<double> report_column(const ErrorReport& report, const std::string& name)
{
    std::vector<double> out;
    for (const auto& level : report.levels) {
        const auto& e = level.errors;
        if (name == "h") {
            out.push_back(level.h);
        } else if (name == "err_u_LinfL2") {
            out.push_back(e.u_LinfL2);
        } else if (name == "err_u_L2H1") {
            out.push_back(e.u_L2H1);
        } else if (name == "err_v_LinfL2") {
            out.push_back(e.v_LinfL2);
        } else if (name == "err_v_LinfH1") {
            out.push_back(e.v_LinfH1);
        } else if (name == "err_x_LinfH1") {
            out.push_back(e.x_LinfH1);
        } else {
            throw std::invalid_argument("unknown report column '" + name + "'");
        }
    }
    return out;
}

namespace {

std::string format_g7(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.7g", value);
    return buf;
}

/// EOC for the pair ending at level k, or an empty cell.
std::string eoc_cell(const std::vector<double>& errors, const std::vector<double>& h, std::size_t k)
{
    if (k == 0 || !(errors[k - 1] > 0.0) || !(errors[k] > 0.0)) {
        return "";
    }
    const std::array<double, 2> e{errors[k - 1], errors[k]};
    const std::array<double, 2> hh{h[k - 1], h[k]};
    return format_g7(compute_eoc(e, hh).front());
}

void write_table(const ErrorReport& report, const std::filesystem::path& path, const std::vector<std::string>& columns)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << "level,dof,h";
    for (const auto& column : columns) {
        out << ",err_" << column << ",eoc_" << column;
    }
    out << '\n';

    const auto h = report_column(report, "h");
    std::vector<std::vector<double>> values;
    for (const auto& column : columns) {
        values.push_back(report_column(report, "err_" + column));
    }
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const auto& level = report.levels[k];
        out << level.level << ',' << level.dof << ',' << format_g7(level.h);
        for (const auto& column : values) {
            out << ',' << format_g7(column[k]) << ',' << eoc_cell(column, h, k);
        }
        out << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

} // namespace

void emit_table(const ErrorReport& report, const std::filesystem::path& path)
{
    write_table(report, path, {"u_LinfL2", "u_L2H1", "v_LinfH1", "x_LinfH1"});
}

void emit_velocity_table(const ErrorReport& report, const std::filesystem::path& path)
{
    write_table(report, path, {"v_LinfL2"});
}

} // namespace esfem
