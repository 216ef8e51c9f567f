#include "segwave/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace segwave {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_number(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value +
                          "'");
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + value +
                      "'");
}

std::vector<double> parse_list(const std::string& value,
                               const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number(item, key));
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "' expects a comma-separated list");
    }
    return out;
}

const std::set<std::string>& preset_keys(PresetName name) {
    static const std::set<std::string> lv = {"alpha", "r", "d", "k"};
    static const std::set<std::string> pp = {"alpha", "r", "d",
                                             "gamma1", "gamma2", "k"};
    static const std::set<std::string> skt = {"alpha", "r", "d1", "d2", "a11",
                                              "a12", "a21", "a22", "k"};
    static const std::set<std::string> gskt = {
        "alpha", "r", "d1", "d2", "a11", "a12", "a21", "a22",
        "beta11", "beta12", "beta21", "beta22", "k"};
    switch (name) {
        case PresetName::LotkaVolterra: return lv;
        case PresetName::PottsPetrovskii: return pp;
        case PresetName::SKT: return skt;
        case PresetName::GeneralizedSKT: return gskt;
    }
    return lv;
}

}  // namespace

void RunConfig::assign(const std::string& dotted_key,
                       const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError("expected section.key, got '" + dotted_key + "'");
    }
    const std::string section = dotted_key.substr(0, dot);
    const std::string key = dotted_key.substr(dot + 1);

    if (section == "preset") {
        if (key == "name") {
            preset.name = preset_name_from_string(value);
            // drop params that the new preset does not recognize
            for (auto it = preset.params.begin(); it != preset.params.end();) {
                it = preset_keys(preset.name).count(it->first)
                         ? std::next(it)
                         : preset.params.erase(it);
            }
            return;
        }
        if (!preset_keys(preset.name).count(key)) {
            throw ConfigError("preset '" + to_string(preset.name) +
                              "' has no parameter '" + key + "'");
        }
        preset.params[key] = parse_number(value, dotted_key);
        return;
    }
    if (section == "solver") {
        if (key == "L") solver.L = parse_number(value, dotted_key);
        else if (key == "N") {
            solver.N = static_cast<std::size_t>(parse_number(value, dotted_key));
        } else if (key == "newton_tol") {
            solver.newton_tol = parse_number(value, dotted_key);
        } else if (key == "max_newton_iters") {
            solver.max_newton_iters =
                static_cast<int>(parse_number(value, dotted_key));
        } else if (key == "damping") {
            solver.damping = parse_number(value, dotted_key);
        } else if (key == "bc_tol") {
            solver.bc_tol = parse_number(value, dotted_key);
        } else if (key == "k_schedule") {
            solver.k_schedule = parse_list(value, dotted_key);
        } else if (key == "phase_anchor") {
            if (value == "auto") solver.phase_anchor = PhaseAnchor::automatic;
            else if (value == "phi_half") solver.phase_anchor = PhaseAnchor::phi_half;
            else if (value == "psi_half") solver.phase_anchor = PhaseAnchor::psi_half;
            else throw ConfigError("phase_anchor: auto, phi_half or psi_half");
        } else if (key == "analytic_jacobian") {
            solver.analytic_jacobian = parse_bool(value, dotted_key);
        } else if (key == "speed_tol") {
            match.speed_tol = parse_number(value, dotted_key);
        } else if (key == "flux_tol_rel") {
            match.flux_tol_rel = parse_number(value, dotted_key);
        } else if (key == "front_tol") {
            match.shoot.front_tol = parse_number(value, dotted_key);
        } else if (key == "rk_tol") {
            match.shoot.rel_tol = parse_number(value, dotted_key);
        } else if (key == "xi_step") {
            match.xi_step = parse_number(value, dotted_key);
        } else if (key == "grid_n") {
            grid_n = static_cast<int>(parse_number(value, dotted_key));
        } else {
            throw ConfigError("unknown solver key '" + key + "'");
        }
        return;
    }
    if (section == "output") {
        if (key == "directory") {
            out_dir = value;
        } else if (key == "formats") {
            formats.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item != "csv" && item != "json") {
                    throw ConfigError("unknown output format '" + item + "'");
                }
                formats.push_back(item);
            }
        } else {
            throw ConfigError("unknown output key '" + key + "'");
        }
        return;
    }
    throw ConfigError("unknown section '" + section + "'");
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                if (section != "preset" && section != "solver" &&
                    section != "output") {
                    throw ConfigError("unknown section '" + section + "'");
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("expected key = value");
            }
            if (section.empty()) {
                throw ConfigError("key outside of any section");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            cfg.assign(section + "." + key, value);
        } catch (const ConfigError& err) {
            std::ostringstream msg;
            msg << origin << ":" << lineno << ": " << err.what();
            throw ConfigError(msg.str());
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace segwave
