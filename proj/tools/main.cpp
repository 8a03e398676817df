#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hill4bp/errors.hpp"
#include "hill4bp/pipeline.hpp"

namespace {

using hill4bp::pipeline::RunConfig;

void parse_range(const std::string& text, RunConfig& cfg) {
    // A:B:STEP
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("--range expects A:B:STEP");
    cfg.x_lo = std::stod(text.substr(0, c1));
    cfg.x_hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    cfg.x_step = std::stod(text.substr(c2 + 1));
}

void parse_grid(const std::string& text, RunConfig& cfg) {
    // NxM: N x*-columns are informational (charts use the family grid), M is
    // the theta resolution
    const auto x = text.find('x');
    if (x == std::string::npos) throw CLI::ValidationError("--grid expects NxM");
    cfg.grid_ntheta = std::stoi(text.substr(x + 1));
    if (cfg.grid_ntheta < 2) throw CLI::ValidationError("--grid theta count too small");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Arnold-diffusion pipeline for the elliptic Hill four-body problem"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, range_text, grid_text, channel;

    app.add_option("--config", config_path, "key=value config file (mu, eps)");
    app.add_option("--out", cfg.out_dir, "output/artifact directory");
    app.add_option("--mu", cfg.mu, "mass ratio");
    app.add_option("--eps", cfg.eps, "eccentricity");
    app.add_option("--range", range_text, "x* range A:B:STEP");
    app.add_option("--seed-count", cfg.seed_count, "manifold seeds per branch");
    app.add_option("--grid", grid_text, "chart grid NxM (theta resolution M)");
    app.add_option("--channel", channel,
                   "channel selection {hom-z1,hom-z2,het-z1,het-z2}");

    auto* c_eq = app.add_subcommand("equilibria", "equilibrium points and energies");
    auto* c_fam = app.add_subcommand("family", "Lyapunov family over the x* range");
    auto* c_man = app.add_subcommand("manifolds", "manifold cuts and tangency curves");
    auto* c_conn = app.add_subcommand("connections", "symmetric connection points");
    auto* c_chart = app.add_subcommand("chart", "scattering-map charts");
    auto* c_verify = app.add_subcommand("verify", "diffusion hypothesis verification");
    auto* c_pseudo = app.add_subcommand("pseudo", "pseudo-orbit of the first-order maps");

    c_verify->add_option("--mechanism", cfg.mechanism, "single | two-map");
    c_verify->add_option("--type", cfg.conn_type, "hom | het");
    c_verify->add_flag("--tables", cfg.tables,
                       "regenerate the reference-table regression report");
    c_pseudo->add_option("--type", cfg.conn_type, "hom | het");
    c_pseudo->add_option("--eps-orbit", cfg.pseudo_eps, "perturbation size");
    c_pseudo->add_option("--steps", cfg.pseudo_steps, "maximum iterations");
    c_pseudo->add_option("--x0", cfg.pseudo_x0, "initial x*");
    c_pseudo->add_option("--theta0", cfg.pseudo_theta0, "initial theta");
    c_pseudo->add_option("--policy", cfg.policy, "single | greedy-two-map");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            const auto p = hill4bp::params_from_config_file(config_path);
            cfg.mu = p.mu;
            cfg.eps = p.eps;
        }
        // explicit flags win over the config file
        for (const auto* opt : {app.get_option("--mu")})
            if (opt->count()) cfg.mu = opt->as<double>();
        for (const auto* opt : {app.get_option("--eps")})
            if (opt->count()) cfg.eps = opt->as<double>();
        if (!range_text.empty()) parse_range(range_text, cfg);
        if (!grid_text.empty()) parse_grid(grid_text, cfg);
        if (!channel.empty()) cfg.channels = {channel};

        if (c_eq->parsed()) hill4bp::pipeline::cmd_equilibria(cfg);
        if (c_fam->parsed()) hill4bp::pipeline::cmd_family(cfg);
        if (c_man->parsed()) hill4bp::pipeline::cmd_manifolds(cfg);
        if (c_conn->parsed()) hill4bp::pipeline::cmd_connections(cfg);
        if (c_chart->parsed()) hill4bp::pipeline::cmd_chart(cfg);
        if (c_verify->parsed()) hill4bp::pipeline::cmd_verify(cfg);
        if (c_pseudo->parsed()) hill4bp::pipeline::cmd_pseudo(cfg);
    } catch (const hill4bp::StagedDependencyError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
