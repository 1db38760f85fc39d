#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "warpimm/forms.hpp"
#include "warpimm/jet.hpp"

namespace warpimm::harness {

/// Settings shared by every command. Precedence: defaults, config file,
/// environment (WARPIMM_*), command-line flags.
struct RunConfig {
  /// General acceptance tolerance of a command's verdict.
  double tol = 1e-6;
  double rankTol = 1e-9;
  double adaptTol = 1e-6;
  double fdTol = 1e-5;
  std::uint64_t seed = 0x5eed;
  /// First-derivative finite-difference step; second derivatives use 10h.
  double h = 1e-4;
  /// Grassmannian grid resolution for certification (0: search only).
  int gridRes = 0;
  int starts = 16;
  int jobs = 1;

  /// Throws InvalidArgument for nonpositive tolerances, steps or budgets.
  void validate() const;
  forms::NullityOptions nullityOptions() const;
  FdSteps fdSteps() const { return {h, 10.0 * h}; }

  nlohmann::json toJson() const;
  /// Missing keys keep their current values.
  void merge(const nlohmann::json& doc);
  /// Reads WARPIMM_TOL, WARPIMM_RANK_TOL, WARPIMM_ADAPT_TOL, WARPIMM_FD_TOL,
  /// WARPIMM_SEED, WARPIMM_H, WARPIMM_GRID, WARPIMM_STARTS, WARPIMM_JOBS.
  void applyEnvironment();
};

/// Defaults, then the optional config file, then the environment.
RunConfig loadConfig(const std::optional<std::string>& path);

}  // namespace warpimm::harness
