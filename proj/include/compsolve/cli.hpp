#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace compsolve {

enum ExitCode : int
{
  ExitSuccess = 0,
  ExitNegative = 2, ///< certificate FAIL/INCONCLUSIVE, or a solve that did not converge
  ExitConfig = 3,   ///< I/O or configuration error
};

struct RunConfig
{
  std::string command; ///< certify, solve, fixed-point, elliptic, ns-steady, ns-evolve, sweep
  std::filesystem::path input_path;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides; ///< dotted key=value
};

const std::vector<std::string>& commands();

/// Runs one command; writes its files under output_dir and a one-line JSON summary to `summary`.
int run(const RunConfig& cfg, std::ostream& summary);

} // namespace compsolve
