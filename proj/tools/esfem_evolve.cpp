// esfem-evolve: convergence studies, regularization comparison, tumor growth and the
// verification suite for diffusion on surfaces driven by the diffused quantity.
//
// Exit codes: 0 success, 1 failed checks or other errors, 2 configuration error,
// 3 mesh degeneration, 4 linear solver failure.

#include <esfem/errors.hpp>
#include <esfem/experiments.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct FlagValues
{
    std::optional<std::string> config_file;
    std::map<std::string, std::string> settings;
};

void add_setting_flags(CLI::App* app, FlagValues& values)
{
    app->add_option_function<std::string>("--config", [&values](const std::string& v) { values.config_file = v; },
                                          "key=value configuration file; flags override it");
    auto setting = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            flag, [&values, key](const std::string& v) { values.settings[key] = v; }, help);
    };
    setting("--levels", "levels", "refinement levels A..B");
    setting("--level", "level", "single mesh level (tumor)");
    setting("--tau", "tau", "fixed time step");
    setting("--tau-c", "tau_c", "time step tau = c h^2");
    setting("--alpha", "alpha", "velocity regularization weight");
    setting("--beta", "beta", "mean curvature weight");
    setting("--delta", "delta", "solution coupling strength");
    setting("--gamma", "gamma", "reaction rate");
    setting("--final-time", "T", "final time");
    setting("--seed", "seed", "random seed");
    setting("--out", "out", "output directory");
    setting("--export-every", "export_every", "export the surface every N steps (0: never)");
    setting("--solver", "solver", "cholesky|cg");
    setting("--cg-tol", "cg_tol", "relative residual tolerance of CG");
    setting("--normal-coupling", "normal_coupling", "nodal|interpolated");
    setting("--loads-on", "loads_on", "old|new");
    app->add_flag_callback("--dump-matrices", [&values] { values.settings["dump_matrices"] = "true"; },
                           "write mass and stiffness matrices of each initial mesh");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Evolving surface finite elements for surface PDEs driving the surface motion"};
    app.require_subcommand(1);

    FlagValues values;
    std::optional<esfem::Experiment> chosen;
    for (auto experiment : {esfem::Experiment::example1, esfem::Experiment::example3, esfem::Experiment::tumor,
                            esfem::Experiment::verify}) {
        auto* sub = app.add_subcommand(esfem::experiment_name(experiment));
        add_setting_flags(sub, values);
        sub->callback([&chosen, experiment] { chosen = experiment; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        auto config = esfem::default_config(*chosen);
        if (values.config_file) {
            config = esfem::load_config_file(*values.config_file, config);
            config.experiment = *chosen;
        }
        for (const auto& [key, value] : values.settings) {
            esfem::apply_setting(config, key, value);
        }
        return esfem::run_experiment(config);
    } catch (const esfem::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const esfem::MeshDegenerated& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const esfem::LinearSolveFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
