#pragma once

#include <stdexcept>
#include <string>

#include "georeg/flight_sim.hpp"

namespace georeg::cli {

/// Config problem with the 1-based line it refers to.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parsed run configuration. Mode parameters land in sim.params; the rest
/// of SimConfig is filled from optional keys with the defaults below.
struct RunConfig {
    SimConfig sim;
};

/// Parses the JSON config document. Unknown keys, missing required keys,
/// wrong types and out-of-range values raise ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace georeg::cli
