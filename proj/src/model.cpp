#include "hill4bp/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hill4bp/errors.hpp"

namespace hill4bp {

ModelParams derive_params(double mu, double eps) {
    if (!(mu > 0.0 && mu < 1.0))
        throw ParameterError("mu must lie in (0,1), got " + std::to_string(mu));
    if (!(eps >= 0.0 && eps < 1.0))
        throw ParameterError("eps must lie in [0,1), got " + std::to_string(eps));
    ModelParams p;
    p.mu = mu;
    p.eps = eps;
    p.d = std::sqrt(1.0 - 3.0 * mu + 3.0 * mu * mu);
    p.lambda1 = 1.5 * (1.0 - p.d);
    p.lambda2 = 1.5 * (1.0 + p.d);
    p.a = 0.5 * (1.0 - p.lambda2);
    p.b = 0.5 * (1.0 - p.lambda1);
    return p;
}

ModelParams params_from_config(std::istream& in) {
    double mu = kDefaultMu;
    double eps = kDefaultEps;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "mu") mu = std::stod(val);
        else if (key == "eps") eps = std::stod(val);
    }
    return derive_params(mu, eps);
}

ModelParams params_from_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config file: " + path);
    return params_from_config(in);
}

void write_params_config(std::ostream& out, const ModelParams& p) {
    out.precision(17);
    out << "mu = " << p.mu << "\n";
    out << "eps = " << p.eps << "\n";
}

double ExtendedState::wrap_phase(double s) {
    const double two_pi = 2.0 * M_PI;
    double w = std::fmod(s, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

PhaseState apply_symmetry(const PhaseState& z, Symmetry which) {
    switch (which) {
        case Symmetry::S: return {z.x, -z.y, -z.px, z.py};
        case Symmetry::Sprime: return {-z.x, z.y, z.px, -z.py};
        case Symmetry::Sdoubleprime: return {-z.x, -z.y, -z.px, -z.py};
    }
    return z;
}

bool reverses_time(Symmetry which) {
    return which != Symmetry::Sdoubleprime;
}

} // namespace hill4bp
