#pragma once
// INI run configuration.
//
//   [grid]        T0, n_steps
//   [signal]      sigma_Y, theta_<j> (default zeta_j), enlarge (default true)
//   [levy]        zeta, lambda            comma-separated, one entry per mark
//   [market]      T, b, sigma, gamma_<j> (default 0), eps_adm
//   [quadrature]  mode (auto | gaussian-decay | periodic), abs_tol, max_nodes, envelope_floor
//   [mc]          n_paths, seed, dump_paths
//
// Time-dependent coefficients take either one number (constant) or n_steps
// comma-separated values, one per grid cell. Marks are numbered from 1.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "infodrift/kernel.hpp"
#include "infodrift/model.hpp"

namespace infodrift {

struct RunConfig {
    SignalSpec signal;
    DiscreteLevyMeasure levy;
    MarketSpec market;
    QuadratureSpec quadrature;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    std::size_t dump_paths = 16;

    bool operator==(const RunConfig&) const = default;
};

// Overrides are "section.key=value" and replace (or add) file values before
// interpretation. Throws Error(InvalidConfig) with line or key context.
RunConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});
RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

}  // namespace infodrift
