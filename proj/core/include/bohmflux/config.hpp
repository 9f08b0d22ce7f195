#ifndef BOHMFLUX_CONFIG_HPP
#define BOHMFLUX_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bohmflux/scattering.hpp"

namespace bohmflux {

/// Flat sectioned key=value scenario file. Sections: [packet], [potential],
/// [grid], [spheres], [bins], [ensemble], [output], [stationary]. Unknown
/// sections, unknown keys and duplicate keys are rejected; '#' starts a
/// comment (units are documented in comments by convention).
class ScenarioConfig {
public:
    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse_text(const std::string& text);

    bool has_section(const std::string& s) const;
    bool has_key(const std::string& s, const std::string& k) const;

    double get_double(const std::string& s, const std::string& k) const;
    double get_double_or(const std::string& s, const std::string& k, double fallback) const;
    long get_int(const std::string& s, const std::string& k) const;
    long get_int_or(const std::string& s, const std::string& k, long fallback) const;
    std::string get_string(const std::string& s, const std::string& k) const;
    std::vector<double> get_doubles(const std::string& s, const std::string& k) const;
    Vec3 get_vec3(const std::string& s, const std::string& k) const;

    /// Sections required by a command but absent; empty means valid.
    std::vector<std::string> missing_sections(const std::vector<std::string>& required) const;

    /// Whitespace-normalized, sorted rendering used for the config hash.
    std::string canonical_text() const;
    uint64_t hash() const;

    // Domain object builders (validate preconditions as they go).
    GaussianSuperposition build_packet() const;
    Potential build_potential() const;
    BinPartition build_bins() const;
    ScatteringScenario build_scenario() const;

    struct StationaryParams {
        std::vector<double> k_values;
        int l_cap = 64;
        double r_max = 0.0;  // 0: module default
    };
    StationaryParams build_stationary() const;

    uint64_t seed() const;
    void override_seed(uint64_t seed);

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}

#endif
