// SPDX-License-Identifier: Apache-2.0

/**
 * \file config.hpp
 * \brief Run configuration: flat key-value text or an equivalent flat JSON object.
 *
 * Key-value form, one key per line, '#' starts a comment:
 *
 *   gamma1 = 0.02
 *   gamma2 = -0.015
 *   gamma3 = 0.00025
 *   c = 1.7
 *   d = 0
 *   family = polynomial
 *   m = 6
 *   probes = 0.2
 *
 * Lists (p, probes) are comma separated. The JSON form uses the same keys with
 * numbers, strings and arrays.
 */

#pragma once

#include "membrane/basis.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace membrane {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct SweepRange
{
  double c_start = 0.0;
  double c_end = 0.0;
  double c_step = 0.05;  ///< initial load step
  double sag_step = 0.05; ///< initial sag step once the sweep switches to f
};

struct RunConfig
{
  MaterialParams material;
  LoadParams load;
  std::optional<SweepRange> sweep;
  BasisFamily family = BasisFamily::polynomial;
  int m = 6;
  int m_min = 1; ///< convergence tables run m_min..m_max
  int m_max = 6;
  int n = 1;     ///< number of adaptive shape parameters
  std::optional<std::vector<double>> p; ///< fixed shape parameters; optimised when empty
  std::optional<int> quad;              ///< Gauss node count; automatic when empty
  std::vector<double> probes{0.5};
  std::string out_dir = ".";
  int jobs = 1;

  /// Throws ConfigError for any inconsistent or out-of-range field.
  void validate() const;

  /// Basis for size m, with p fixed from the config or seeded for optimisation.
  [[nodiscard]] BasisSpec basis(int m_value) const;
};

inline constexpr int kMaxConvergenceM = 12;

/// Parses either form; text whose first non-blank character is '{' is read as JSON.
[[nodiscard]] RunConfig parse_config(std::string_view text);

/// Reads and parses a file; the .json extension also selects JSON.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

} // namespace membrane
