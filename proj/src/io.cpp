#include "hill4bp/io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hill4bp/errors.hpp"

namespace hill4bp::io {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory<4>& traj,
                          const ModelParams& p) {
    out << "t,x,y,px,py,xdot,ydot,h\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const PhaseState z = PhaseState::from_array(traj.node(i));
        out << fmt(traj.times()[i]) << ',' << fmt(z.x) << ',' << fmt(z.y) << ','
            << fmt(z.px) << ',' << fmt(z.py) << ',' << fmt(z.xdot()) << ','
            << fmt(z.ydot()) << ',' << fmt(energy_ch4bp(z, p)) << '\n';
    }
}

void write_family_csv(std::ostream& out, const OrbitFamily& family) {
    out << "h,x_star,ydot_star,period,action,lambda,py_star,return_error\n";
    for (const auto& orb : family.orbits) {
        out << fmt(orb.energy) << ',' << fmt(orb.x_star) << ',' << fmt(orb.ydot_star())
            << ',' << fmt(orb.period) << ',' << fmt(orb.action) << ','
            << fmt(orb.lambda_unstable) << ',' << fmt(orb.py_star) << ','
            << fmt(orb.return_error) << '\n';
    }
}

void write_cut_csv(std::ostream& out, const SectionCut& cut) {
    out << "theta_seed,flight_time,x,y,px,py,xdot,ydot,tangential,fold_next\n";
    for (const auto& pt : cut.points) {
        const PhaseState& z = pt.state;
        out << fmt(pt.theta_seed) << ',' << fmt(pt.flight_time) << ',' << fmt(z.x) << ','
            << fmt(z.y) << ',' << fmt(z.px) << ',' << fmt(z.py) << ',' << fmt(z.xdot())
            << ',' << fmt(z.ydot()) << ',' << (pt.tangential ? 1 : 0) << ','
            << (pt.fold_next ? 1 : 0) << '\n';
    }
}

void write_tangency_csv(std::ostream& out, const std::vector<TangencySample>& curve) {
    out << "x,xdot\n";
    for (const auto& s : curve) out << fmt(s.x) << ',' << fmt(s.xdot) << '\n';
}

void write_channel_csv(std::ostream& out, const Channel& channel) {
    out << "x_star,zx,zy,zxdot,zydot,zpx,zpy,theta_minus,theta_plus,delta,"
           "delta_mod1,sym_residual\n";
    for (const auto& node : channel.nodes) {
        const PhaseState& z = node.conn.candidate.state;
        out << fmt(node.x_star()) << ',' << fmt(z.x) << ',' << fmt(z.y) << ','
            << fmt(z.xdot()) << ',' << fmt(z.ydot()) << ',' << fmt(z.px) << ','
            << fmt(z.py) << ',' << fmt(node.conn.theta_minus) << ','
            << fmt(node.conn.theta_plus) << ',' << fmt(node.conn.delta_unreduced) << ','
            << fmt(node.conn.delta) << ',' << fmt(node.conn.candidate.sym_residual)
            << '\n';
    }
}

void write_chart_csv(std::ostream& out, const ScatteringChart& chart) {
    out << "x_star,theta,S,dS_composed\n";
    for (std::size_t ix = 0; ix < chart.x_grid.size(); ++ix)
        for (std::size_t it = 0; it < chart.theta_grid.size(); ++it)
            out << fmt(chart.x_grid[ix]) << ',' << fmt(chart.theta_grid[it]) << ','
                << fmt(chart.s_values[ix][it]) << ',' << fmt(chart.ds_composed[ix][it])
                << '\n';
}

void write_chart_gnuplot(std::ostream& out, const ScatteringChart& chart) {
    // nonuniform matrix: first row = ncols then theta values; then one row
    // per x*: x followed by S values
    out << chart.theta_grid.size();
    for (double th : chart.theta_grid) out << ' ' << fmt(th);
    out << '\n';
    for (std::size_t ix = 0; ix < chart.x_grid.size(); ++ix) {
        out << fmt(chart.x_grid[ix]);
        for (std::size_t it = 0; it < chart.theta_grid.size(); ++it)
            out << ' ' << fmt(chart.s_values[ix][it]);
        out << '\n';
    }
}

void write_pseudo_csv(std::ostream& out, const PseudoOrbit& orbit) {
    out << "step,map,x_star,theta,action,action_increment\n";
    for (std::size_t i = 0; i < orbit.steps.size(); ++i) {
        const auto& s = orbit.steps[i];
        out << i << ',' << s.map_index << ',' << fmt(s.x_star) << ',' << fmt(s.theta)
            << ',' << fmt(s.action) << ',' << fmt(s.action_increment) << '\n';
    }
}

std::string equilibria_json(const std::array<EquilibriumPoint, 4>& points,
                            const ModelParams& p, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["mu"] = p.mu;
    j["eps"] = p.eps;
    json arr = json::array();
    for (const auto& e : points) {
        json je;
        je["label"] = e.label_name();
        je["x"] = e.x;
        je["y"] = e.y;
        je["energy"] = e.energy;
        je["stability"] = e.stability_name();
        json eig = json::array();
        for (const auto& ev : e.eigenvalues)
            eig.push_back({{"re", ev.real()}, {"im", ev.imag()}});
        je["eigenvalues"] = eig;
        arr.push_back(je);
    }
    j["equilibria"] = arr;
    return j.dump(2) + "\n";
}

std::string equilibria_text(const std::array<EquilibriumPoint, 4>& points) {
    std::ostringstream os;
    os << "label  x                      y                      energy                 stability\n";
    for (const auto& e : points) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-6s %-22.14g %-22.14g %-22.14g %s\n",
                      e.label_name(), e.x, e.y, e.energy, e.stability_name());
        os << line;
    }
    return os.str();
}

std::string family_json(const OrbitFamily& family, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["side"] = family.side == FamilySide::L1 ? "L1" : "L2";
    json arr = json::array();
    for (const auto& orb : family.orbits) {
        arr.push_back({{"x_star", orb.x_star},
                       {"py_star", orb.py_star},
                       {"period", orb.period},
                       {"energy", orb.energy},
                       {"action", orb.action},
                       {"lambda", orb.lambda_unstable},
                       {"return_error", orb.return_error}});
    }
    j["orbits"] = arr;
    return j.dump(2) + "\n";
}

OrbitFamily family_from_json(const std::string& text, const ModelParams& p,
                             const IntegratorConfig& cfg, std::string* config_hash) {
    const json j = json::parse(text);
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    OrbitFamily family;
    family.side = j.at("side").get<std::string>() == "L2" ? FamilySide::L2 : FamilySide::L1;
    for (const auto& je : j.at("orbits")) {
        family.orbits.push_back(correct_symmetric_orbit(je.at("x_star").get<double>(),
                                                        je.at("py_star").get<double>(), p,
                                                        cfg));
    }
    return family;
}

namespace {

json state_json(const PhaseState& z) {
    return {{"x", z.x}, {"y", z.y}, {"px", z.px}, {"py", z.py}};
}
PhaseState state_from_json(const json& j) {
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("px").get<double>(),
            j.at("py").get<double>()};
}

} // namespace

std::string channel_json(const Channel& channel, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["label"] = channel_label_name(channel.label);
    j["theta_star"] = channel.theta_star;
    json arr = json::array();
    for (const auto& node : channel.nodes) {
        const auto& c = node.conn.candidate;
        json jn;
        jn["x_star"] = node.x_star();
        jn["source_x_star"] = node.source->x_star;
        jn["source_py_star"] = node.source->py_star;
        jn["target_x_star"] = node.target->x_star;
        jn["target_py_star"] = node.target->py_star;
        jn["state"] = state_json(c.state);
        jn["type"] = c.type == ConnectionType::Homoclinic ? "homoclinic" : "heteroclinic";
        jn["sym_residual"] = c.sym_residual;
        jn["theta_seed"] = c.theta_seed;
        jn["flight_time"] = c.flight_time;
        jn["branch_sign"] = c.branch_sign;
        jn["displacement"] = c.displacement;
        jn["cut_index"] = c.cut_index;
        jn["section"] = c.section.name;
        jn["theta_minus"] = node.conn.theta_minus;
        jn["theta_plus"] = node.conn.theta_plus;
        jn["delta_unreduced"] = node.conn.delta_unreduced;
        jn["delta"] = node.conn.delta;
        arr.push_back(jn);
    }
    j["nodes"] = arr;
    return j.dump(2) + "\n";
}

Channel channel_from_json(const std::string& text, const ModelParams& p,
                          const IntegratorConfig& cfg, std::string* config_hash) {
    const json j = json::parse(text);
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    Channel ch;
    ch.label = channel_label_from_name(j.at("label").get<std::string>());
    ch.theta_star = j.at("theta_star").get<double>();
    for (const auto& jn : j.at("nodes")) {
        ChannelNode node;
        auto src = std::make_shared<PeriodicOrbit>(
            correct_symmetric_orbit(jn.at("source_x_star").get<double>(),
                                    jn.at("source_py_star").get<double>(), p, cfg));
        std::shared_ptr<const PeriodicOrbit> tgt;
        if (jn.at("target_x_star").get<double>() == jn.at("source_x_star").get<double>()) {
            tgt = src;
        } else {
            tgt = std::make_shared<PeriodicOrbit>(
                correct_symmetric_orbit(jn.at("target_x_star").get<double>(),
                                        jn.at("target_py_star").get<double>(), p, cfg));
        }
        node.source = src;
        node.target = tgt;
        ConnectionCandidate cand;
        cand.state = state_from_json(jn.at("state"));
        cand.type = jn.at("type").get<std::string>() == "heteroclinic"
                        ? ConnectionType::Heteroclinic
                        : ConnectionType::Homoclinic;
        cand.symmetric = true;
        cand.sym_residual = jn.at("sym_residual").get<double>();
        cand.source_orbit = src;
        cand.target_orbit = tgt;
        cand.theta_seed = jn.at("theta_seed").get<double>();
        cand.flight_time = jn.at("flight_time").get<double>();
        cand.branch_sign = jn.at("branch_sign").get<int>();
        cand.displacement = jn.at("displacement").get<double>();
        cand.cut_index = jn.at("cut_index").get<int>();
        cand.section = jn.at("section").get<std::string>() == "Sy" ? SectionSpec::sy()
                                                                   : SectionSpec::sx();
        ConnectionPoint conn;
        conn.candidate = cand;
        conn.theta_minus = jn.at("theta_minus").get<double>();
        conn.theta_plus = jn.at("theta_plus").get<double>();
        conn.delta_unreduced = jn.at("delta_unreduced").get<double>();
        conn.delta = jn.at("delta").get<double>();
        conn.z_minus = k0_param(*src, conn.theta_minus);
        conn.z_plus = k0_param(*tgt, conn.theta_plus);
        node.conn = conn;
        ch.nodes.push_back(std::move(node));
    }
    return ch;
}

std::string chart_json(const ScatteringChart& chart, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["label"] = channel_label_name(chart.label);
    j["x_grid"] = chart.x_grid;
    j["theta_grid"] = chart.theta_grid;
    j["s_values"] = chart.s_values;
    j["ds_composed"] = chart.ds_composed;
    j["deltas"] = chart.deltas;
    j["theta_minus"] = chart.theta_minus;
    j["periods"] = chart.periods;
    j["energies"] = chart.energies;
    j["actions"] = chart.actions;
    j["tail_cut"] = chart.mcfg.tail_cut;
    j["quad_tol"] = chart.mcfg.quad_tol;
    j["max_horizon"] = chart.mcfg.max_horizon;
    j["failed_points"] = chart.failed_points;
    return j.dump() + "\n";
}

ScatteringChart chart_from_json(const std::string& text, std::string* config_hash) {
    const json j = json::parse(text);
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    ScatteringChart chart;
    chart.label = channel_label_from_name(j.at("label").get<std::string>());
    chart.x_grid = j.at("x_grid").get<std::vector<double>>();
    chart.theta_grid = j.at("theta_grid").get<std::vector<double>>();
    chart.s_values = j.at("s_values").get<std::vector<std::vector<double>>>();
    chart.ds_composed = j.at("ds_composed").get<std::vector<std::vector<double>>>();
    chart.deltas = j.at("deltas").get<std::vector<double>>();
    chart.theta_minus = j.at("theta_minus").get<std::vector<double>>();
    chart.periods = j.at("periods").get<std::vector<double>>();
    chart.energies = j.at("energies").get<std::vector<double>>();
    chart.actions = j.at("actions").get<std::vector<double>>();
    chart.mcfg.tail_cut = j.at("tail_cut").get<double>();
    chart.mcfg.quad_tol = j.at("quad_tol").get<double>();
    chart.mcfg.max_horizon = j.at("max_horizon").get<double>();
    chart.failed_points = j.at("failed_points").get<std::size_t>();
    return chart;
}

std::string report_json(const DiffusionReport& report, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["mechanism"] = report.mechanism == DiffusionReport::Mechanism::SingleMapBirkhoff
                         ? "single-map-birkhoff"
                         : "two-map";
    j["channels"] = report.channel_names;
    j["x_lo"] = report.x_lo;
    j["x_hi"] = report.x_hi;
    j["verdict"] = report.verdict;
    j["negative_direction"] = report.negative_direction;
    if (report.mechanism == DiffusionReport::Mechanism::SingleMapBirkhoff) {
        j["bound"] = report.bound;
        j["x_values"] = report.x_values;
        j["integrals"] = report.integrals;
        j["min_integral"] = report.min_integral;
        j["C1"] = report.c1;
        j["C1_threshold"] = report.c1_threshold;
    } else {
        j["c_threshold"] = report.c_threshold;
        json ws = json::array();
        for (const auto& w : report.windows)
            ws.push_back({{"map", w.map_index + 1},
                          {"theta_lo", w.theta_lo},
                          {"theta_hi", w.theta_hi},
                          {"min_value", w.min_value},
                          {"margin", w.margin}});
        j["windows"] = ws;
    }
    return j.dump(2) + "\n";
}

std::string report_text(const DiffusionReport& report) {
    std::ostringstream os;
    if (report.mechanism == DiffusionReport::Mechanism::SingleMapBirkhoff) {
        os << "single-map (Birkhoff) verification, channel " << report.channel_names
           << ", x* in [" << fmt(report.x_lo) << ", " << fmt(report.x_hi) << "]\n";
        os << "x*          integral of -dS/dtheta o sigma0 over one theta period\n";
        for (std::size_t i = 0; i < report.x_values.size(); ++i) {
            char line[96];
            std::snprintf(line, sizeof(line), "%-10.6g  %.15f\n", report.x_values[i],
                          report.integrals[i]);
            os << line;
        }
        os << "min |integral| = " << fmt(report.min_integral) << "  (bound "
           << fmt(report.bound) << ")\n";
        os << "C1 = " << fmt(report.c1) << "  (threshold " << fmt(report.c1_threshold)
           << ")\n";
    } else {
        os << "two-map verification, channels " << report.channel_names << ", c = "
           << fmt(report.c_threshold) << "\n";
        for (const auto& w : report.windows) {
            char line[128];
            std::snprintf(line, sizeof(line),
                          "map %d on [%.6g, %.6g]: min = %.9g  margin = %.9g\n",
                          w.map_index + 1, w.theta_lo, w.theta_hi, w.min_value, w.margin);
            os << line;
        }
    }
    os << "verdict: " << (report.verdict ? "true" : "false") << "\n";
    return os.str();
}

} // namespace hill4bp::io
