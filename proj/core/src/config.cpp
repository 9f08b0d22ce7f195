#include "bohmflux/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bohmflux/errors.hpp"
#include "bohmflux/stats.hpp"

namespace bohmflux {

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"packet", {"components", "center", "k0", "sigma"}},  // cN.* added dynamically
        {"potential", {"kind", "depth", "radius", "height", "width", "file"}},
        {"grid", {"half_width", "n", "dt", "frame_stride", "enforce_overflow"}},
        {"spheres", {"radii", "n_theta", "n_phi", "flux_dt"}},
        {"bins", {"type", "n_mu", "n_phi", "cap_deg", "mu_edges", "phi_counts"}},
        {"ensemble", {"n_traj", "seed", "t_max", "rel_tol", "abs_tol"}},
        {"output", {"dir", "write_trajectories", "trajectory_stride"}},
        {"stationary", {"k_values", "l_max", "r_max"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_component_key(const std::string& key, const std::string& suffix) {
    // cN.center / cN.k0 / cN.sigma / cN.weight_re / cN.weight_im
    if (key.size() < 3 || key[0] != 'c') return false;
    const auto dot = key.find('.');
    if (dot == std::string::npos) return false;
    for (std::size_t i = 1; i < dot; ++i)
        if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
    return key.substr(dot + 1) == suffix;
}

bool key_allowed(const std::string& section, const std::string& key) {
    const auto& sch = schema();
    const auto it = sch.find(section);
    if (it == sch.end()) return false;
    if (std::find(it->second.begin(), it->second.end(), key) != it->second.end())
        return true;
    if (section == "packet") {
        for (const char* suffix : {"center", "k0", "sigma", "weight_re", "weight_im"})
            if (is_component_key(key, suffix)) return true;
    }
    return false;
}

}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidParameterError("config: cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_text(buf.str());
}

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    std::vector<std::string> problems;
    int line_no = 0;

    while (std::getline(is, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back("line " + std::to_string(line_no) + ": malformed section");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                problems.push_back("line " + std::to_string(line_no) +
                                   ": unknown section [" + section + "]");
            else
                cfg.sections_[section];  // register even if empty
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": key outside any section");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key_allowed(section, key)) {
            problems.push_back("unknown key '" + key + "' in section [" + section + "]");
            continue;
        }
        auto& sec = cfg.sections_[section];
        if (sec.count(key)) {
            problems.push_back("duplicate key '" + key + "' in section [" + section + "]");
            continue;
        }
        sec[key] = value;
    }

    if (!problems.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw InvalidParameterError(msg);
    }
    return cfg;
}

bool ScenarioConfig::has_section(const std::string& s) const { return sections_.count(s); }

bool ScenarioConfig::has_key(const std::string& s, const std::string& k) const {
    const auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k);
}

std::string ScenarioConfig::get_string(const std::string& s, const std::string& k) const {
    const auto it = sections_.find(s);
    if (it == sections_.end())
        throw InvalidParameterError("config: missing section [" + s + "]");
    const auto kit = it->second.find(k);
    if (kit == it->second.end())
        throw InvalidParameterError("config: missing key '" + k + "' in [" + s + "]");
    return kit->second;
}

double ScenarioConfig::get_double(const std::string& s, const std::string& k) const {
    const std::string v = get_string(s, k);
    std::size_t used = 0;
    double x;
    try {
        x = std::stod(v, &used);
    } catch (...) {
        throw InvalidParameterError("config: [" + s + "] " + k + " is not a number: " + v);
    }
    if (trim(v.substr(used)) != "")
        throw InvalidParameterError("config: [" + s + "] " + k + " has trailing junk: " + v);
    return x;
}

double ScenarioConfig::get_double_or(const std::string& s, const std::string& k,
                                     double fallback) const {
    return has_key(s, k) ? get_double(s, k) : fallback;
}

long ScenarioConfig::get_int(const std::string& s, const std::string& k) const {
    const double x = get_double(s, k);
    const long i = static_cast<long>(std::llround(x));
    if (std::abs(x - i) > 1e-9)
        throw InvalidParameterError("config: [" + s + "] " + k + " must be an integer");
    return i;
}

long ScenarioConfig::get_int_or(const std::string& s, const std::string& k,
                                long fallback) const {
    return has_key(s, k) ? get_int(s, k) : fallback;
}

std::vector<double> ScenarioConfig::get_doubles(const std::string& s,
                                                const std::string& k) const {
    std::istringstream is(get_string(s, k));
    std::vector<double> out;
    double x;
    while (is >> x) out.push_back(x);
    if (!is.eof())
        throw InvalidParameterError("config: [" + s + "] " + k + " has non-numeric entries");
    if (out.empty())
        throw InvalidParameterError("config: [" + s + "] " + k + " is empty");
    return out;
}

Vec3 ScenarioConfig::get_vec3(const std::string& s, const std::string& k) const {
    const auto v = get_doubles(s, k);
    if (v.size() != 3)
        throw InvalidParameterError("config: [" + s + "] " + k + " must have 3 entries");
    return {v[0], v[1], v[2]};
}

std::vector<std::string> ScenarioConfig::missing_sections(
    const std::vector<std::string>& required) const {
    std::vector<std::string> missing;
    for (const auto& s : required)
        if (!sections_.count(s)) missing.push_back(s);
    return missing;
}

std::string ScenarioConfig::canonical_text() const {
    std::ostringstream os;
    for (const auto& [section, keys] : sections_) {
        os << '[' << section << "]\n";
        for (const auto& [k, v] : keys) os << k << '=' << v << '\n';
    }
    return os.str();
}

uint64_t ScenarioConfig::hash() const {
    const std::string c = canonical_text();
    return fnv1a64(c.data(), c.size());
}

GaussianSuperposition ScenarioConfig::build_packet() const {
    const long n = get_int_or("packet", "components", 1);
    if (n < 1) throw InvalidParameterError("config: packet components must be >= 1");

    std::vector<GaussianPacket> comps;
    if (n == 1 && has_key("packet", "center")) {
        comps.push_back({get_vec3("packet", "center"), get_vec3("packet", "k0"),
                         get_double("packet", "sigma"), Complex{1.0, 0.0}});
    } else {
        for (long i = 1; i <= n; ++i) {
            const std::string p = "c" + std::to_string(i) + ".";
            comps.push_back({get_vec3("packet", p + "center"), get_vec3("packet", p + "k0"),
                             get_double("packet", p + "sigma"),
                             Complex{get_double_or("packet", p + "weight_re", 1.0),
                                     get_double_or("packet", p + "weight_im", 0.0)}});
        }
    }
    return GaussianSuperposition(std::move(comps)).normalized();
}

Potential ScenarioConfig::build_potential() const {
    const std::string kind = get_string("potential", "kind");
    if (kind == "none") return Potential::none();
    if (kind == "square_well")
        return Potential::square_well(get_double("potential", "depth"),
                                      get_double("potential", "radius"));
    if (kind == "gaussian_bump")
        return Potential::gaussian_bump(get_double("potential", "height"),
                                        get_double("potential", "width"));
    if (kind == "grid") {
        const GridField f = GridField::load(get_string("potential", "file"));
        std::vector<double> vals(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) vals[i] = f.values()[i].real();
        return Potential::from_grid(std::move(vals), f.origin(), f.spacing(), f.nx(),
                                    f.ny(), f.nz());
    }
    throw InvalidParameterError("config: unknown potential kind '" + kind + "'");
}

BinPartition ScenarioConfig::build_bins() const {
    const std::string type = get_string("bins", "type");
    if (type == "bands")
        return BinPartition::bands(static_cast<int>(get_int("bins", "n_mu")),
                                   static_cast<int>(get_int("bins", "n_phi")));
    if (type == "cap_bands") {
        const auto edges = get_doubles("bins", "mu_edges");
        const auto counts_d = get_doubles("bins", "phi_counts");
        std::vector<int> counts;
        for (double c : counts_d) counts.push_back(static_cast<int>(std::llround(c)));
        return BinPartition::cap_bands(get_double("bins", "cap_deg"), edges, counts);
    }
    throw InvalidParameterError("config: unknown bins type '" + type + "'");
}

ScatteringScenario ScenarioConfig::build_scenario() const {
    ScatteringScenario s;
    s.psi0 = build_packet();
    s.potential = has_section("potential") ? build_potential() : Potential::none();
    s.sphere_radii = get_doubles("spheres", "radii");
    s.sphere_n_theta = static_cast<int>(get_int_or("spheres", "n_theta", 64));
    s.sphere_n_phi = static_cast<int>(get_int_or("spheres", "n_phi", 128));
    s.flux_dt = get_double_or("spheres", "flux_dt", 0.25);
    s.bins = build_bins();
    s.n_traj = static_cast<int>(get_int("ensemble", "n_traj"));
    s.seed = seed();
    s.t_max = get_double_or("ensemble", "t_max", 0.0);
    s.integrator.rel_tol = get_double_or("ensemble", "rel_tol", 1e-8);
    s.integrator.abs_tol = get_double_or("ensemble", "abs_tol", 1e-8);

    if (has_section("grid")) {
        s.grid_half_width = get_double_or("grid", "half_width", 0.0);
        s.grid_n = static_cast<int>(get_int_or("grid", "n", 128));
        s.dt = get_double_or("grid", "dt", 0.02);
        s.frame_stride = static_cast<int>(get_int_or("grid", "frame_stride", 8));
        s.enforce_overflow = get_int_or("grid", "enforce_overflow", 0) != 0;
    }
    return s;
}

ScenarioConfig::StationaryParams ScenarioConfig::build_stationary() const {
    StationaryParams p;
    p.k_values = get_doubles("stationary", "k_values");
    p.l_cap = static_cast<int>(get_int_or("stationary", "l_max", 64));
    p.r_max = get_double_or("stationary", "r_max", 0.0);
    return p;
}

uint64_t ScenarioConfig::seed() const {
    const long s = get_int("ensemble", "seed");
    if (s < 0) throw InvalidParameterError("config: seed must be non-negative");
    return static_cast<uint64_t>(s);
}

void ScenarioConfig::override_seed(uint64_t seed) {
    sections_["ensemble"]["seed"] = std::to_string(seed);
}

}
