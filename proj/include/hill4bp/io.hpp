#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hill4bp/connections.hpp"
#include "hill4bp/diffusion.hpp"
#include "hill4bp/manifolds.hpp"
#include "hill4bp/orbits.hpp"
#include "hill4bp/scattering.hpp"

namespace hill4bp::io {

/// Fixed 17-significant-digit formatting; all emitted numerics use it so
/// regression diffs are exact.
std::string fmt(double v);

void write_trajectory_csv(std::ostream& out, const Trajectory<4>& traj,
                          const ModelParams& p);
void write_family_csv(std::ostream& out, const OrbitFamily& family);
void write_cut_csv(std::ostream& out, const SectionCut& cut);
void write_tangency_csv(std::ostream& out, const std::vector<TangencySample>& curve);
/// Connection rows in both coordinate conventions, one row per node.
void write_channel_csv(std::ostream& out, const Channel& channel);
void write_chart_csv(std::ostream& out, const ScatteringChart& chart);
/// gnuplot nonuniform-matrix layout for contour plotting.
void write_chart_gnuplot(std::ostream& out, const ScatteringChart& chart);
void write_pseudo_csv(std::ostream& out, const PseudoOrbit& orbit);

std::string equilibria_json(const std::array<EquilibriumPoint, 4>& points,
                            const ModelParams& p, const std::string& config_hash);
std::string equilibria_text(const std::array<EquilibriumPoint, 4>& points);

std::string family_json(const OrbitFamily& family, const std::string& config_hash);
/// Restores the family from its artifact by re-correcting each stored
/// anchor (cheap, and keeps dense trajectories bit-consistent).
OrbitFamily family_from_json(const std::string& text, const ModelParams& p,
                             const IntegratorConfig& cfg, std::string* config_hash);

std::string channel_json(const Channel& channel, const std::string& config_hash);
Channel channel_from_json(const std::string& text, const ModelParams& p,
                          const IntegratorConfig& cfg, std::string* config_hash);

std::string chart_json(const ScatteringChart& chart, const std::string& config_hash);
ScatteringChart chart_from_json(const std::string& text, std::string* config_hash);

std::string report_json(const DiffusionReport& report, const std::string& config_hash);
std::string report_text(const DiffusionReport& report);

} // namespace hill4bp::io
