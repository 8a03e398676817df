#pragma once

#include <string>
#include <vector>

#include "hill4bp/integrate.hpp"
#include "hill4bp/model.hpp"
#include "hill4bp/scattering.hpp"

namespace hill4bp::pipeline {

struct RunConfig {
    double mu = kDefaultMu;
    double eps = kDefaultEps;
    double x_lo = 0.615;
    double x_hi = 0.63;
    double x_step = 0.005;
    int seed_count = 2000;
    double displacement = 1e-6;
    int grid_ntheta = 201;
    std::vector<std::string> channels = {"hom-z1", "hom-z2", "het-z1", "het-z2"};
    std::string mechanism = "single";  // or "two-map"
    std::string conn_type = "hom";     // hom | het
    bool tables = false;
    std::string out_dir = "out";
    double pseudo_eps = 1e-3;
    int pseudo_steps = 400;
    double pseudo_x0 = 0.628;
    double pseudo_theta0 = 0.0;
    std::string policy = "greedy-two-map";
    IntegratorConfig icfg;
    MelnikovConfig mcfg;

    ModelParams params() const { return derive_params(mu, eps); }
};

/// Hash of the computation-defining fields; artifacts record it and
/// consuming stages require a match.
std::string config_hash(const RunConfig& cfg);

void cmd_equilibria(const RunConfig& cfg);
void cmd_family(const RunConfig& cfg);
void cmd_manifolds(const RunConfig& cfg);
void cmd_connections(const RunConfig& cfg);
void cmd_chart(const RunConfig& cfg);
void cmd_verify(const RunConfig& cfg);
void cmd_pseudo(const RunConfig& cfg);

} // namespace hill4bp::pipeline
