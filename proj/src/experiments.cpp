#include <esfem/errors.hpp>
#include <esfem/experiments.hpp>
#include <esfem/io.hpp>
#include <esfem/verification.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace esfem {

std::string experiment_name(Experiment experiment)
{
    switch (experiment) {
    case Experiment::example1: return "example1";
    case Experiment::example3: return "example3";
    case Experiment::tumor: return "tumor";
    case Experiment::verify: return "verify";
    }
    return "unknown";
}

Experiment parse_experiment(const std::string& name)
{
    for (auto e : {Experiment::example1, Experiment::example3, Experiment::tumor, Experiment::verify}) {
        if (experiment_name(e) == name) {
            return e;
        }
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

RunConfig default_config(Experiment experiment)
{
    RunConfig config;
    config.experiment = experiment;
    switch (experiment) {
    case Experiment::example1:
    case Experiment::verify:
        break;
    case Experiment::example3:
        config.final_time = 2.0;
        config.delta = 0.0;
        config.alpha = 1.0;
        config.beta = 0.0;
        break;
    case Experiment::tumor:
        config.final_time = 5.0;
        config.tau_rule = TauRule::fixed;
        config.tau = 1e-3;
        config.level = 3;
        config.alpha = 0.0;
        config.beta = 0.01;
        config.delta = 0.1; // not fixed by the model; 0.2 and above distort level 3 before T = 5
        config.export_every = 1000;
        break;
    }
    return config;
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value)
{
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(out)) {
        throw ConfigError("invalid number '" + value + "' for " + key);
    }
    return out;
}

long long parse_integer(const std::string& key, const std::string& value)
{
    char* end = nullptr;
    const long long out = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw ConfigError("invalid integer '" + value + "' for " + key);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

void parse_level_range(RunConfig& config, const std::string& value)
{
    const auto dots = value.find("..");
    if (dots == std::string::npos) {
        config.level_min = config.level_max = static_cast<int>(parse_integer("levels", value));
    } else {
        config.level_min = static_cast<int>(parse_integer("levels", value.substr(0, dots)));
        config.level_max = static_cast<int>(parse_integer("levels", value.substr(dots + 2)));
    }
    if (config.level_min < 0 || config.level_max < config.level_min) {
        throw ConfigError("invalid level range '" + value + "'");
    }
}

std::string g17(double value)
{
    return format_g17(value);
}

} // namespace

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value)
{
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    auto positive = [&](double v) {
        if (!(v > 0.0)) {
            throw ConfigError(key + " must be positive");
        }
        return v;
    };
    auto non_negative = [&](double v) {
        if (!(v >= 0.0)) {
            throw ConfigError(key + " must be non-negative");
        }
        return v;
    };

    if (key == "experiment") {
        c.experiment = parse_experiment(value);
    } else if (key == "levels") {
        parse_level_range(c, value);
    } else if (key == "level_min") {
        c.level_min = static_cast<int>(parse_integer(key, value));
    } else if (key == "level_max") {
        c.level_max = static_cast<int>(parse_integer(key, value));
    } else if (key == "level") {
        c.level = static_cast<int>(parse_integer(key, value));
        if (c.level < 0) {
            throw ConfigError("level must be non-negative");
        }
    } else if (key == "alpha") {
        c.alpha = non_negative(parse_double(key, value));
    } else if (key == "beta") {
        c.beta = non_negative(parse_double(key, value));
    } else if (key == "delta") {
        c.delta = parse_double(key, value);
    } else if (key == "gamma") {
        c.gamma = positive(parse_double(key, value));
    } else if (key == "a") {
        c.a = positive(parse_double(key, value));
    } else if (key == "b") {
        c.b = positive(parse_double(key, value));
    } else if (key == "diffusivity" || key == "D_c") {
        c.diffusivity = positive(parse_double(key, value));
    } else if (key == "r0") {
        c.r0 = positive(parse_double(key, value));
    } else if (key == "rK") {
        c.rK = positive(parse_double(key, value));
    } else if (key == "k") {
        c.k = positive(parse_double(key, value));
    } else if (key == "T") {
        c.final_time = positive(parse_double(key, value));
    } else if (key == "tau_rule") {
        if (value == "fixed") {
            c.tau_rule = TauRule::fixed;
        } else if (value == "h-squared") {
            c.tau_rule = TauRule::h_squared;
        } else {
            throw ConfigError("tau_rule must be fixed or h-squared");
        }
    } else if (key == "tau") {
        c.tau = positive(parse_double(key, value));
        c.tau_rule = TauRule::fixed;
    } else if (key == "tau_c") {
        c.tau_c = positive(parse_double(key, value));
        c.tau_rule = TauRule::h_squared;
    } else if (key == "tau_pre") {
        c.tau_pre = positive(parse_double(key, value));
    } else if (key == "pre_time") {
        c.pre_time = non_negative(parse_double(key, value));
    } else if (key == "perturbation") {
        c.perturbation = non_negative(parse_double(key, value));
    } else if (key == "seed") {
        const long long s = parse_integer(key, value);
        if (s < 0) {
            throw ConfigError("seed must be non-negative");
        }
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "out") {
        if (value.empty()) {
            throw ConfigError("output directory must not be empty");
        }
        c.output_dir = value;
    } else if (key == "export_every") {
        const long long e = parse_integer(key, value);
        if (e < 0) {
            throw ConfigError("export_every must be non-negative");
        }
        c.export_every = static_cast<int>(e);
    } else if (key == "solver") {
        if (value == "cholesky") {
            c.solver = SolverKind::cholesky;
        } else if (value == "cg") {
            c.solver = SolverKind::conjugate_gradient;
        } else {
            throw ConfigError("solver must be cholesky or cg");
        }
    } else if (key == "cg_tol") {
        c.cg_tolerance = positive(parse_double(key, value));
    } else if (key == "normal_coupling") {
        if (value == "nodal") {
            c.normal_coupling = NormalCoupling::nodal;
        } else if (value == "interpolated") {
            c.normal_coupling = NormalCoupling::interpolated;
        } else {
            throw ConfigError("normal_coupling must be nodal or interpolated");
        }
    } else if (key == "loads_on") {
        if (value == "old") {
            c.loads_on = LoadSurface::old_surface;
        } else if (value == "new") {
            c.loads_on = LoadSurface::new_surface;
        } else {
            throw ConfigError("loads_on must be old or new");
        }
    } else if (key == "abort_min_angle") {
        c.abort_min_angle = non_negative(parse_double(key, value));
    } else if (key == "dump_matrices") {
        c.dump_matrices = parse_bool(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig parse_config_text(const std::string& text, RunConfig base)
{
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
        }
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read configuration file '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), std::move(base));
}

std::string serialize(const RunConfig& c)
{
    std::ostringstream out;
    out << "experiment = " << experiment_name(c.experiment) << '\n';
    out << "level_min = " << c.level_min << '\n';
    out << "level_max = " << c.level_max << '\n';
    out << "level = " << c.level << '\n';
    out << "alpha = " << g17(c.alpha) << '\n';
    out << "beta = " << g17(c.beta) << '\n';
    out << "delta = " << g17(c.delta) << '\n';
    out << "gamma = " << g17(c.gamma) << '\n';
    out << "a = " << g17(c.a) << '\n';
    out << "b = " << g17(c.b) << '\n';
    out << "diffusivity = " << g17(c.diffusivity) << '\n';
    out << "r0 = " << g17(c.r0) << '\n';
    out << "rK = " << g17(c.rK) << '\n';
    out << "k = " << g17(c.k) << '\n';
    out << "T = " << g17(c.final_time) << '\n';
    // tau and tau_c select the rule when parsed, so the rule is written last.
    out << "tau = " << g17(c.tau) << '\n';
    out << "tau_c = " << g17(c.tau_c) << '\n';
    out << "tau_rule = " << (c.tau_rule == TauRule::fixed ? "fixed" : "h-squared") << '\n';
    out << "tau_pre = " << g17(c.tau_pre) << '\n';
    out << "pre_time = " << g17(c.pre_time) << '\n';
    out << "perturbation = " << g17(c.perturbation) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "out = " << c.output_dir.string() << '\n';
    out << "export_every = " << c.export_every << '\n';
    out << "solver = " << (c.solver == SolverKind::cholesky ? "cholesky" : "cg") << '\n';
    out << "cg_tol = " << g17(c.cg_tolerance) << '\n';
    out << "normal_coupling = " << (c.normal_coupling == NormalCoupling::nodal ? "nodal" : "interpolated") << '\n';
    out << "loads_on = " << (c.loads_on == LoadSurface::old_surface ? "old" : "new") << '\n';
    out << "abort_min_angle = " << g17(c.abort_min_angle) << '\n';
    out << "dump_matrices = " << (c.dump_matrices ? "true" : "false") << '\n';
    return out.str();
}

double resolve_tau(const RunConfig& config, double h_max)
{
    const double target = config.tau_rule == TauRule::fixed ? config.tau : config.tau_c * h_max * h_max;
    const double steps = std::ceil(config.final_time / target - 1e-9);
    return config.final_time / std::max(steps, 1.0);
}

StepperConfig stepper_config(const RunConfig& config, double tau)
{
    StepperConfig sc;
    sc.tau = tau;
    sc.final_time = config.final_time;
    sc.solver.kind = config.solver;
    sc.solver.cg_tolerance = config.cg_tolerance;
    sc.abort_min_angle_deg = config.abort_min_angle;
    sc.normal_coupling = config.normal_coupling;
    sc.loads_on = config.loads_on;
    return sc;
}

ProblemSpec example1_spec(const RunConfig& config)
{
    VelocityLaw law;
    law.kind = config.beta > 0.0 ? VelocityLaw::Kind::regularized_mcf : VelocityLaw::Kind::regularized_elliptic;
    law.alpha = config.alpha;
    law.beta = config.beta;
    law.delta = config.delta;
    return manufactured_problem({config.r0, config.rK, config.k}, law);
}

ProblemSpec example3_spec(const RunConfig& config, double alpha, double beta)
{
    RunConfig c = config;
    c.alpha = alpha;
    c.beta = beta;
    c.delta = 0.0;
    return example1_spec(c);
}

namespace {

std::string step_label(std::size_t step)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu", step);
    return buf;
}

std::vector<NodalField> state_fields(const SystemState& state)
{
    std::vector<NodalField> fields;
    fields.push_back(scalar_field("u", state.u));
    if (state.has_second_species()) {
        fields.push_back(scalar_field("w", state.w));
    }
    fields.push_back(vector_field("velocity", state.v));
    return fields;
}

/// Observer writing surface_<step>.vtk/.obj every `every` steps and at the final step.
Observer export_observer(const SurfaceMesh& topology, int every, std::size_t last_step,
                         const std::filesystem::path& dir, std::vector<std::filesystem::path>* written)
{
    return [&topology, every, last_step, dir, written](std::size_t step, const SystemState& state) {
        if (every <= 0 || (step % static_cast<std::size_t>(every) != 0 && step != last_step)) {
            return;
        }
        const auto mesh = topology.with_nodes(state.x);
        const auto stem = dir / ("surface_" + step_label(step));
        export_surface(mesh, state_fields(state), stem.string() + ".vtk");
        export_obj(mesh, stem.string() + ".obj");
        if (written) {
            written->push_back(stem.string() + ".vtk");
        }
    };
}

} // namespace

ErrorReport::Level run_convergence_level(const ProblemSpec& spec, const RunConfig& config, int level,
                                         const std::filesystem::path& export_dir)
{
    const auto mesh = generate_icosphere(level, config.r0);
    const double tau = resolve_tau(config, mesh.h_max());
    const auto sc = stepper_config(config, tau);
    const auto initial = exact_initial_state(spec, mesh);

    if (config.dump_matrices && !export_dir.empty()) {
        std::filesystem::create_directories(export_dir);
        const auto [mass, stiffness] = assemble_mass_stiffness(mesh);
        write_coordinate(mass, export_dir / "mass.txt");
        write_coordinate(stiffness, export_dir / "stiffness.txt");
    }

    ErrorAccumulator errors(spec, mesh);
    std::vector<Observer> observers{errors.observer()};
    if (config.export_every > 0 && !export_dir.empty()) {
        std::filesystem::create_directories(export_dir);
        observers.push_back(export_observer(mesh, config.export_every, step_count(sc), export_dir, nullptr));
    }
    const auto result = run(spec, mesh, initial, sc, observers);
    result.rethrow_if_failed();

    ErrorReport::Level out;
    out.level = level;
    out.dof = mesh.num_nodes();
    out.errors = errors.result();
    out.h = out.errors.h_final;
    return out;
}

ErrorReport run_convergence_study(const ProblemSpec& spec, const RunConfig& config,
                                  const std::filesystem::path& output_dir)
{
    std::filesystem::create_directories(output_dir);
    ErrorReport report;
    for (int level = config.level_min; level <= config.level_max; ++level) {
        const auto level_dir = output_dir / ("level_" + std::to_string(level));
        report.levels.push_back(run_convergence_level(spec, config, level, level_dir));
    }
    emit_table(report, output_dir / "table.csv");
    emit_velocity_table(report, output_dir / "table_v_l2.csv");
    return report;
}

TumorSummary run_tumor(const RunConfig& config, double alpha, double beta, const std::string& variant,
                       const std::filesystem::path& output_dir)
{
    const TumorKinetics kinetics{config.diffusivity, config.gamma, config.a, config.b};
    VelocityLaw law;
    law.kind = beta > 0.0 ? VelocityLaw::Kind::regularized_mcf : VelocityLaw::Kind::regularized_elliptic;
    law.alpha = alpha;
    law.beta = beta;
    law.delta = config.delta;
    const auto spec = tumor_problem(kinetics, law);

    const auto mesh = generate_icosphere(config.level, config.r0);
    TumorInitialOptions init;
    init.seed = config.seed;
    init.perturbation_bound = config.perturbation;
    init.pre_time = config.pre_time;
    init.tau_pre = config.tau_pre;
    init.solver.kind = config.solver;
    init.solver.cg_tolerance = config.cg_tolerance;
    auto [u0, w0] = tumor_initial_data(mesh, kinetics, init);

    SystemState initial;
    initial.x = mesh.nodes();
    initial.u = std::move(u0);
    initial.w = std::move(w0);
    initial.v = Vector::Zero(3 * static_cast<Eigen::Index>(mesh.num_nodes()));

    const auto sc = stepper_config(config, resolve_tau(config, mesh.h_max()));
    TumorSummary summary;
    summary.variant = variant;
    summary.alpha = alpha;
    summary.beta = beta;
    summary.u_min = summary.w_min = std::numeric_limits<double>::infinity();
    summary.u_max = summary.w_max = -std::numeric_limits<double>::infinity();

    auto envelope = [&summary](std::size_t, const SystemState& state) {
        summary.finite = summary.finite && state.u.allFinite() && state.w.allFinite() && state.x.all_finite();
        summary.u_min = std::min(summary.u_min, state.u.minCoeff());
        summary.u_max = std::max(summary.u_max, state.u.maxCoeff());
        summary.w_min = std::min(summary.w_min, state.w.minCoeff());
        summary.w_max = std::max(summary.w_max, state.w.maxCoeff());
    };
    std::filesystem::create_directories(output_dir);
    std::vector<Observer> observers{envelope};
    observers.push_back(export_observer(mesh, config.export_every, step_count(sc), output_dir, &summary.exports));

    const auto result = run(spec, mesh, initial, sc, observers);
    summary.completed = result.ok();
    summary.error = result.error;
    summary.steps = result.steps_taken;
    summary.final_time = result.final_state.t;

    const auto final_mesh = mesh.with_nodes(result.final_state.x);
    summary.min_angle_deg = mesh_quality(final_mesh).min_angle_deg;
    summary.min_radius = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < final_mesh.num_nodes(); ++j) {
        const double r = final_mesh.nodes().node(j).norm();
        summary.min_radius = std::min(summary.min_radius, r);
        summary.max_radius = std::max(summary.max_radius, r);
    }
    return summary;
}

std::vector<TumorSummary> run_tumor_pair(const RunConfig& config, const std::filesystem::path& output_dir)
{
    return {run_tumor(config, 0.0, 0.01, "mcf", output_dir / "mcf"),
            run_tumor(config, 0.01, 0.0, "elliptic", output_dir / "elliptic")};
}

void write_tumor_summary(const std::vector<TumorSummary>& runs, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << "variant,alpha,beta,completed,steps,final_time,finite,u_min,u_max,w_min,w_max,min_angle_deg,"
           "min_radius,max_radius\n";
    for (const auto& r : runs) {
        out << r.variant << ',' << g17(r.alpha) << ',' << g17(r.beta) << ',' << (r.completed ? 1 : 0) << ','
            << r.steps << ',' << g17(r.final_time) << ',' << (r.finite ? 1 : 0) << ',' << g17(r.u_min) << ','
            << g17(r.u_max) << ',' << g17(r.w_min) << ',' << g17(r.w_max) << ',' << g17(r.min_angle_deg) << ','
            << g17(r.min_radius) << ',' << g17(r.max_radius) << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

int run_experiment(const RunConfig& config)
{
    const auto& out = config.output_dir;
    std::filesystem::create_directories(out);
    {
        std::ofstream cfg(out / "config.txt", std::ios::binary | std::ios::trunc);
        cfg << serialize(config);
    }

    switch (config.experiment) {
    case Experiment::example1: {
        const auto report = run_convergence_study(example1_spec(config), config, out);
        std::cout << "wrote " << (out / "table.csv").string() << " (" << report.levels.size() << " levels)\n";
        return 0;
    }
    case Experiment::example3: {
        run_convergence_study(example3_spec(config, 0.0, 1.0), config, out / "mcf");
        run_convergence_study(example3_spec(config, 1.0, 0.0), config, out / "elliptic");
        std::cout << "wrote " << (out / "mcf").string() << " and " << (out / "elliptic").string() << '\n';
        return 0;
    }
    case Experiment::tumor: {
        const auto runs = run_tumor_pair(config, out);
        write_tumor_summary(runs, out / "tumor_summary.csv");
        for (const auto& r : runs) {
            if (r.error) {
                std::rethrow_exception(r.error);
            }
        }
        std::cout << "wrote " << (out / "tumor_summary.csv").string() << '\n';
        return 0;
    }
    case Experiment::verify: {
        VerificationOptions options;
        options.seed = config.seed;
        const auto records = run_verification_suite(options);
        std::ofstream report(out / "verify.txt", std::ios::binary | std::ios::trunc);
        bool all_pass = true;
        for (const auto& record : records) {
            const auto line = format_record(record);
            report << line << '\n';
            std::cout << line << '\n';
            all_pass = all_pass && record.pass();
        }
        return all_pass ? 0 : 1;
    }
    }
    return 1;
}

} // namespace esfem
