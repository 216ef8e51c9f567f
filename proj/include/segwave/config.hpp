#ifndef SEGWAVE_CONFIG_HPP
#define SEGWAVE_CONFIG_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "segwave/model.hpp"
#include "segwave/phaseplane.hpp"
#include "segwave/system_wave.hpp"

namespace segwave {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Resolved run configuration: [preset], [solver] and [output] sections of
/// the config file plus command-line overrides. Unknown sections or keys are
/// rejected.
struct RunConfig {
    Preset preset;
    SolverConfig solver;
    MatchOptions match;
    int grid_n = 200;          // validation sampling density
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};

    /// Applies one "section.key=value" assignment with schema checking.
    void assign(const std::string& dotted_key, const std::string& value);
};

/// Parses the nested key-value config file. Lines are `key = value` inside
/// `[section]` headers; `#` starts a comment.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<memory>");

}  // namespace segwave

#endif
