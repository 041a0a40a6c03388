#include <CLI11.hpp>

#include <iostream>
#include <limits>
#include <string>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
    using namespace rdgain::cli;

    CLI::App app{"Event-triggered gain scheduling of backstepping controllers for reaction-diffusion PDEs"};
    app.require_subcommand(1);

    CommandOptions opt;
    std::string config, out = ".";
    std::size_t workers = 0, stride = 0;

    auto common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", config, "INI configuration file");
        if (config_required) c->required();
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--workers", workers, "worker threads for batch runs");
        sub->add_option("--stride", stride, "record every K-th step");
    };

    auto* run = app.add_subcommand("run", "simulate one closed-loop trajectory");
    common(run, true);
    auto* tables = app.add_subcommand("tables", "batch sweep producing the event statistics tables");
    common(tables, true);
    auto* kernel = app.add_subcommand("kernel", "solve and export the backstepping kernels");
    common(kernel, true);
    auto* analyze = app.add_subcommand("analyze", "stability constants from parameters alone");
    common(analyze, false);
    double lambda_bar = 0, phi = 0, R = 0, c = 0, epsilon = 0;
    std::string q;
    auto* o_lb = analyze->add_option("--lambda-bar", lambda_bar, "uniform bound of lambda");
    auto* o_phi = analyze->add_option("--phi", phi, "Lipschitz constant of lambda in time");
    auto* o_R = analyze->add_option("--R", R, "trigger parameter in (0, 1)");
    auto* o_c = analyze->add_option("--c", c, "target-system damping");
    auto* o_eps = analyze->add_option("--epsilon", epsilon, "diffusion coefficient");
    auto* o_q = analyze->add_option("--q", q, "boundary parameter at x = 0 (number or inf)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    opt.config = config;
    opt.out = out;
    if (workers) opt.workers = workers;
    if (stride) opt.stride = stride;

    if (*run) return cmd_run(opt);
    if (*tables) return cmd_tables(opt);
    if (*kernel) return cmd_kernel(opt);

    if (*o_lb) opt.lambda_bar = lambda_bar;
    if (*o_phi) opt.phi = phi;
    if (*o_R) opt.R = R;
    if (*o_c) opt.c = c;
    if (*o_eps) opt.epsilon = epsilon;
    if (*o_q) {
        try {
            opt.q = rdgain::detail::to_number("--q", q);
        } catch (const rdgain::ValidationError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
    }
    return cmd_analyze(opt);
}
