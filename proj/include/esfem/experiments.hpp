#pragma once

#include <esfem/analysis.hpp>
#include <esfem/problems.hpp>
#include <esfem/stepper.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esfem {

enum class Experiment { example1, example3, tumor, verify };

enum class TauRule {
    fixed,     ///< tau as given
    h_squared, ///< tau = c h^2, shrunk so that T / tau is an integer
};

///
/// Fully resolved run configuration. Every field has a key=value spelling; serialize() followed by
/// parse_config_text() reproduces the configuration exactly.
///
struct RunConfig
{
    Experiment experiment = Experiment::example1;
    int level_min = 1;
    int level_max = 4;
    int level = 3; ///< single mesh level of the tumor run

    double alpha = 1.0;
    double beta = 0.0;
    double delta = 0.4;
    double gamma = 100.0;
    double a = 0.1;
    double b = 0.9;
    double diffusivity = 10.0;
    double r0 = 1.0;
    double rK = 2.0;
    double k = 0.5;
    double final_time = 1.0;

    TauRule tau_rule = TauRule::h_squared;
    double tau = 1e-3;
    double tau_c = 0.1;
    double tau_pre = 1e-3;
    double pre_time = 5.0;
    double perturbation = 0.01;

    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";
    int export_every = 0; ///< 0 disables surface exports

    SolverKind solver = SolverKind::cholesky;
    double cg_tolerance = 1e-12;
    NormalCoupling normal_coupling = NormalCoupling::nodal;
    LoadSurface loads_on = LoadSurface::old_surface;
    double abort_min_angle = 1.0;
    bool dump_matrices = false;
};

/// Defaults of each experiment: example1 (T=1, alpha=1, beta=0, delta=0.4), example3 (T=2,
/// delta=0), tumor (D_c=10, gamma=100, a=0.1, b=0.9, delta=0.1, T=5, tau=1e-3, level 3).
RunConfig default_config(Experiment experiment);

std::string experiment_name(Experiment experiment);
Experiment parse_experiment(const std::string& name);

/// Applies one key=value assignment; throws ConfigError on unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parses "key = value" lines ('#' starts a comment) on top of base.
RunConfig parse_config_text(const std::string& text, RunConfig base);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base);

/// Lossless key=value text (doubles with 17 significant digits).
std::string serialize(const RunConfig& config);

/// Time step for a mesh with initial h_max.
double resolve_tau(const RunConfig& config, double h_max);

StepperConfig stepper_config(const RunConfig& config, double tau);

/// One refinement level of a manufactured-solution study.
ErrorReport::Level run_convergence_level(const ProblemSpec& spec, const RunConfig& config, int level,
                                         const std::filesystem::path& export_dir = {});

/// Runs config.level_min..level_max and writes table.csv (and table_v_l2.csv) into output_dir.
ErrorReport run_convergence_study(const ProblemSpec& spec, const RunConfig& config,
                                  const std::filesystem::path& output_dir);

struct Example3Result
{
    ErrorReport mcf;      ///< (alpha, beta) = (0, 1)
    ErrorReport elliptic; ///< (alpha, beta) = (1, 0)
};

ProblemSpec example1_spec(const RunConfig& config);
ProblemSpec example3_spec(const RunConfig& config, double alpha, double beta);

struct TumorSummary
{
    std::string variant;
    double alpha = 0.0;
    double beta = 0.0;
    bool completed = false;
    std::size_t steps = 0;
    double final_time = 0.0;
    bool finite = true;
    double u_min = 0.0, u_max = 0.0, w_min = 0.0, w_max = 0.0;
    double min_angle_deg = 0.0;
    double min_radius = 0.0, max_radius = 0.0;
    std::vector<std::filesystem::path> exports;
    std::exception_ptr error;
};

/// Tumor growth with the velocity law (alpha, beta, delta); exports into output_dir.
TumorSummary run_tumor(const RunConfig& config, double alpha, double beta, const std::string& variant,
                       const std::filesystem::path& output_dir);

/// Both regularizations: (alpha, beta) = (0, 0.01) and (0.01, 0).
std::vector<TumorSummary> run_tumor_pair(const RunConfig& config, const std::filesystem::path& output_dir);

void write_tumor_summary(const std::vector<TumorSummary>& runs, const std::filesystem::path& path);

/// Full experiment as run by the CLI; returns the process exit code.
int run_experiment(const RunConfig& config);

} // namespace esfem
