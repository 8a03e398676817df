#include "hill4bp/pipeline.hpp"

#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hill4bp/diffusion.hpp"
#include "hill4bp/errors.hpp"
#include "hill4bp/io.hpp"
#include "hill4bp/reference_data.hpp"

namespace hill4bp::pipeline {

namespace fs = std::filesystem;

namespace {

// Serializes concurrent commands touching the same cache directory.
class CacheLock {
  public:
    explicit CacheLock(const fs::path& dir) {
        fs::create_directories(dir);
        path_ = dir / ".lock";
        fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ >= 0) ::flock(fd_, LOCK_EX);
    }
    ~CacheLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

  private:
    fs::path path_;
    int fd_ = -1;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path, const char* producing_command) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw StagedDependencyError("missing artifact " + path.string() + "; run `hill4bp " +
                                    producing_command + "` first");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_hash(const std::string& found, const RunConfig& cfg, const fs::path& path,
                  const char* producing_command) {
    if (found != config_hash(cfg))
        throw StagedDependencyError("artifact " + path.string() +
                                    " was produced under a different config; rerun `hill4bp " +
                                    producing_command + "`");
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return g;
}

OrbitFamily load_family(const RunConfig& cfg) {
    const fs::path path = fs::path(cfg.out_dir) / "family.json";
    std::string hash;
    OrbitFamily fam =
        io::family_from_json(read_file(path, "family"), cfg.params(), cfg.icfg, &hash);
    require_hash(hash, cfg, path, "family");
    return fam;
}

Channel load_channel(const RunConfig& cfg, const std::string& label) {
    const fs::path path = fs::path(cfg.out_dir) / ("connections_" + label + ".json");
    std::string hash;
    Channel ch =
        io::channel_from_json(read_file(path, "connections"), cfg.params(), cfg.icfg, &hash);
    require_hash(hash, cfg, path, "connections");
    return ch;
}

ScatteringChart load_chart(const RunConfig& cfg, const std::string& label,
                           const char* suffix) {
    const fs::path path = fs::path(cfg.out_dir) / ("chart_" + label + suffix + ".json");
    std::string hash;
    ScatteringChart chart = io::chart_from_json(read_file(path, "chart"), &hash);
    require_hash(hash, cfg, path, "chart");
    return chart;
}

double window_lo_for(ChannelLabel label) {
    return (label == ChannelLabel::HomZ1 || label == ChannelLabel::HetZ1) ? -1.0 : -0.6;
}

} // namespace

std::string config_hash(const RunConfig& cfg) {
    std::ostringstream ss;
    ss.precision(17);
    ss << cfg.mu << '|' << cfg.eps << '|' << cfg.x_lo << '|' << cfg.x_hi << '|'
       << cfg.x_step << '|' << cfg.seed_count << '|' << cfg.displacement << '|'
       << cfg.grid_ntheta << '|' << cfg.icfg.abs_tol << '|' << cfg.icfg.rel_tol << '|'
       << cfg.mcfg.tail_cut << '|' << cfg.mcfg.quad_tol << '|' << cfg.mcfg.max_horizon;
    const std::string text = ss.str();
    // FNV-1a
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void cmd_equilibria(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const ModelParams p = cfg.params();
    const auto points = lagrange_points(p);
    write_file(fs::path(cfg.out_dir) / "equilibria.json",
               io::equilibria_json(points, p, config_hash(cfg)));
    write_file(fs::path(cfg.out_dir) / "equilibria.txt", io::equilibria_text(points));
    std::printf("equilibria: h(L1) = %s -> %s\n", io::fmt(points[0].energy).c_str(),
                (fs::path(cfg.out_dir) / "equilibria.json").c_str());
}

void cmd_family(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const ModelParams p = cfg.params();
    const OrbitFamily fam =
        continue_family(cfg.x_lo, cfg.x_hi, cfg.x_step, FamilySide::L1, p, cfg.icfg);
    std::ostringstream csv;
    io::write_family_csv(csv, fam);
    write_file(fs::path(cfg.out_dir) / "family.csv", csv.str());
    write_file(fs::path(cfg.out_dir) / "family.json",
               io::family_json(fam, config_hash(cfg)));
    std::printf("family: %zu orbits over x* in [%s, %s]\n", fam.orbits.size(),
                io::fmt(cfg.x_lo).c_str(), io::fmt(cfg.x_hi).c_str());
}

void cmd_manifolds(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const ModelParams p = cfg.params();
    const OrbitFamily fam = load_family(cfg);
    for (const auto& orb : fam.orbits) {
        auto orbit = std::make_shared<PeriodicOrbit>(orb);
        const int sign = inner_branch_sign(*orbit, ManifoldKind::Unstable, p, cfg.icfg);
        const auto branch = seed_manifold(orbit, ManifoldKind::Unstable, sign,
                                          cfg.displacement, cfg.seed_count, p, cfg.icfg);
        const auto cut = globalize_to_cut(branch, SectionSpec::sx(), 1, p, cfg.icfg);
        std::ostringstream csv;
        io::write_cut_csv(csv, cut);
        char name[64];
        std::snprintf(name, sizeof(name), "cut_sx_unstable_x%.6g.csv", orb.x_star);
        write_file(fs::path(cfg.out_dir) / name, csv.str());

        const auto curve = tangency_curve(orb.energy, p, -0.8, 0.8, 801);
        std::ostringstream tcsv;
        io::write_tangency_csv(tcsv, curve);
        std::snprintf(name, sizeof(name), "tangency_h%.8g.csv", orb.energy);
        write_file(fs::path(cfg.out_dir) / name, tcsv.str());
    }
    std::printf("manifolds: %zu section cuts written to %s\n", fam.orbits.size(),
                cfg.out_dir.c_str());
}

void cmd_connections(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const ModelParams p = cfg.params();
    const OrbitFamily fam = load_family(cfg);
    ChannelBuildConfig bc;
    bc.displacement = cfg.displacement;
    bc.n_seeds = cfg.seed_count;
    for (const auto& name : cfg.channels) {
        const ChannelLabel label = channel_label_from_name(name);
        const Channel ch = build_channel(fam, label, 0.0, p, cfg.icfg, bc);
        std::ostringstream csv;
        io::write_channel_csv(csv, ch);
        write_file(fs::path(cfg.out_dir) / ("connections_" + name + ".csv"), csv.str());
        write_file(fs::path(cfg.out_dir) / ("connections_" + name + ".json"),
                   io::channel_json(ch, config_hash(cfg)));
        std::printf("connections: %s tracked over %zu x* values\n", name.c_str(),
                    ch.nodes.size());
    }
}

void cmd_chart(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const ModelParams p = cfg.params();
    for (const auto& name : cfg.channels) {
        const Channel ch = load_channel(cfg, name);
        const double lo = window_lo_for(ch.label);
        const auto window_grid = uniform_grid(lo, lo + 1.0, cfg.grid_ntheta);
        const ScatteringChart chart = build_chart(ch, window_grid, p, cfg.icfg, cfg.mcfg);
        write_file(fs::path(cfg.out_dir) / ("chart_" + name + ".json"),
                   io::chart_json(chart, config_hash(cfg)));
        std::ostringstream csv;
        io::write_chart_csv(csv, chart);
        write_file(fs::path(cfg.out_dir) / ("chart_" + name + ".csv"), csv.str());
        std::ostringstream gp;
        io::write_chart_gnuplot(gp, chart);
        write_file(fs::path(cfg.out_dir) / ("chart_" + name + ".matrix"), gp.str());

        const auto unit_grid = uniform_grid(0.0, 1.0, cfg.grid_ntheta);
        const ScatteringChart unit = build_chart(ch, unit_grid, p, cfg.icfg, cfg.mcfg);
        write_file(fs::path(cfg.out_dir) / ("chart_" + name + "_unit.json"),
                   io::chart_json(unit, config_hash(cfg)));
        std::printf("chart: %s on [%g, %g] and [0, 1], %d theta points\n", name.c_str(),
                    lo, lo + 1.0, cfg.grid_ntheta);
    }
}

namespace {

void run_tables(const RunConfig& cfg);

} // namespace

void cmd_verify(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    if (cfg.tables) {
        run_tables(cfg);
        return;
    }
    const bool het = cfg.conn_type == "het";
    DiffusionReport rep;
    if (cfg.mechanism == "two-map") {
        const auto c1 = load_chart(cfg, het ? "het-z1" : "hom-z1", "");
        const auto c2 = load_chart(cfg, het ? "het-z2" : "hom-z2", "");
        TwoMapWindows w;
        if (het) {
            w.lo = reference::kHetWindowLo;
            w.split = reference::kHetWindowSplit;
            w.hi = reference::kHetWindowHi;
        } else {
            w.lo = reference::kHomWindowLo;
            w.split = reference::kHomWindowSplit;
            w.hi = reference::kHomWindowHi;
        }
        rep = verify_two_map(c1, c2, w, het ? reference::kCHet : reference::kCHom);
    } else {
        const auto chart = load_chart(cfg, het ? "het-z1" : "hom-z1", "_unit");
        rep = verify_single_map(chart,
                                het ? reference::kHetIntegralBound
                                    : reference::kHomIntegralBound,
                                het ? reference::kC1Het : reference::kC1Hom);
    }
    const std::string stem = "verify_" + cfg.mechanism + "_" + cfg.conn_type;
    write_file(fs::path(cfg.out_dir) / (stem + ".json"),
               io::report_json(rep, config_hash(cfg)));
    const std::string text = io::report_text(rep);
    write_file(fs::path(cfg.out_dir) / (stem + ".txt"), text);
    std::fputs(text.c_str(), stdout);
}

void cmd_pseudo(const RunConfig& cfg) {
    CacheLock lock(cfg.out_dir);
    const bool het = cfg.conn_type == "het";
    const auto c1 = load_chart(cfg, het ? "het-z1" : "hom-z1", "");
    const auto c2 = load_chart(cfg, het ? "het-z2" : "hom-z2", "");
    const std::vector<const ScatteringChart*> charts{&c1, &c2};
    const PseudoOrbitPolicy policy = cfg.policy == "single"
                                         ? PseudoOrbitPolicy::Single
                                         : PseudoOrbitPolicy::GreedyTwoMap;
    const PseudoOrbit orbit = pseudo_orbit(charts, policy, cfg.pseudo_x0,
                                           cfg.pseudo_theta0, cfg.pseudo_eps,
                                           cfg.pseudo_steps);
    std::ostringstream csv;
    io::write_pseudo_csv(csv, orbit);
    write_file(fs::path(cfg.out_dir) / "pseudo_orbit.csv", csv.str());
    std::printf("pseudo-orbit: %zu steps, net dx* = %s, net dI = %s%s\n",
                orbit.steps.size() - 1, io::fmt(orbit.net_xstar_change()).c_str(),
                io::fmt(orbit.net_action_change()).c_str(),
                orbit.exited_range ? " (range exit)" : "");
}

namespace {

struct TableWriter {
    std::ostringstream os;
    double worst = 0.0;

    void header(const std::string& title) { os << "## " << title << "\n"; }
    void row(const std::string& name, double computed, double published) {
        const double delta = std::abs(computed - published);
        worst = std::max(worst, delta);
        char line[160];
        std::snprintf(line, sizeof(line), "%-28s computed=%-22.14g published=%-16.10g delta=%.3e\n",
                      name.c_str(), computed, published, delta);
        os << line;
    }
};

void run_tables(const RunConfig& cfg) {
    const ModelParams p = cfg.params();
    TableWriter tw;

    const auto points = lagrange_points(p);
    tw.header("equilibrium energy");
    tw.row("h(L1)", points[0].energy, reference::kEnergyL1);

    const OrbitFamily fam = load_family(cfg);
    tw.header("Lyapunov family (h, ydot*, T per x*)");
    for (const auto& ref : reference::kLyapunovFamily) {
        for (const auto& orb : fam.orbits) {
            if (std::abs(orb.x_star - ref.x_star) > 1e-9) continue;
            char base[32];
            std::snprintf(base, sizeof(base), "x*=%.3f", ref.x_star);
            tw.row(std::string(base) + " h", orb.energy, ref.h);
            tw.row(std::string(base) + " ydot*", orb.ydot_star(), ref.ydot_star);
            tw.row(std::string(base) + " T", orb.period, ref.period);
        }
    }

    auto theta_rows = [&](const Channel& ch, const auto& theta_ref) {
        for (const auto& node : ch.nodes) {
            for (const auto& ref : theta_ref) {
                if (std::abs(ref.x_star - node.x_star()) > 1e-9) continue;
                char base[48];
                std::snprintf(base, sizeof(base), "x*=%.3f |theta+-|", node.x_star());
                tw.row(base, std::abs(node.conn.theta_minus), ref.theta_abs);
            }
        }
    };
    auto hom_rows = [&](const char* label, const auto& point_ref, const auto& theta_ref) {
        const Channel ch = load_channel(cfg, label);
        tw.header(std::string("connection ") + label);
        for (const auto& node : ch.nodes) {
            for (const auto& ref : point_ref) {
                if (std::abs(ref.x_star - node.x_star()) > 1e-9) continue;
                const PhaseState& z = node.conn.candidate.state;
                char base[32];
                std::snprintf(base, sizeof(base), "x*=%.3f", node.x_star());
                tw.row(std::string(base) + " x", z.x, ref.x);
                tw.row(std::string(base) + " ydot", z.ydot(), ref.ydot);
            }
        }
        theta_rows(ch, theta_ref);
    };
    auto het_rows = [&](const char* label, const auto& point_ref, const auto& theta_ref) {
        const Channel ch = load_channel(cfg, label);
        tw.header(std::string("connection ") + label);
        for (const auto& node : ch.nodes) {
            for (const auto& ref : point_ref) {
                if (std::abs(ref.x_star - node.x_star()) > 1e-9) continue;
                const PhaseState& z = node.conn.candidate.state;
                char base[32];
                std::snprintf(base, sizeof(base), "x*=%.3f", node.x_star());
                tw.row(std::string(base) + " y", z.y, ref.y);
                tw.row(std::string(base) + " xdot", z.xdot(), ref.xdot);
            }
        }
        theta_rows(ch, theta_ref);
    };
    hom_rows("hom-z1", reference::kHomZ1, reference::kHomZ1Theta);
    hom_rows("hom-z2", reference::kHomZ2, reference::kHomZ2Theta);
    het_rows("het-z1", reference::kHetZ1, reference::kHetZ1Theta);
    het_rows("het-z2", reference::kHetZ2, reference::kHetZ2Theta);

    tw.header("Birkhoff integrals (hom-z1)");
    const auto hom_unit = load_chart(cfg, "hom-z1", "_unit");
    for (const auto& ref : reference::kBirkhoffHom) {
        char base[48];
        std::snprintf(base, sizeof(base), "x*=%.3f integral", ref.x_star);
        tw.row(base, birkhoff_integral(hom_unit, ref.x_star), ref.value);
    }
    tw.header("Birkhoff integrals (het-z1)");
    const auto het_unit = load_chart(cfg, "het-z1", "_unit");
    for (const auto& ref : reference::kBirkhoffHet) {
        char base[48];
        std::snprintf(base, sizeof(base), "x*=%.3f integral", ref.x_star);
        tw.row(base, birkhoff_integral(het_unit, ref.x_star), ref.value);
    }

    tw.os << "worst |delta| = " << io::fmt(tw.worst) << "\n";
    write_file(fs::path(cfg.out_dir) / "tables_regression.txt", tw.os.str());
    std::fputs(tw.os.str().c_str(), stdout);
}

} // namespace

} // namespace hill4bp::pipeline
