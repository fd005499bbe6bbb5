#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hls/field.hpp"
#include "hls/symmetrize.hpp"

namespace hls::cli {

enum class Command {
  energy,
  transform,
  positivity,
  represent,
  symmetrize,
  hemiball,
  lizhu_check,
  counterexample,
  sharp_constant,
};
std::string to_string(Command c);

/// Malformed or invalid configuration (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct GridSpec {
  std::vector<double> min, max;
  std::vector<int> points;
};

struct FunctionSpec {
  std::string family;  ///< extremizer, density, gaussian, indicator, file
  double alpha = 1.0;
  double beta = 1.0;
  double amplitude = 1.0;
  double width = 1.0;
  std::vector<double> center;
  std::vector<double> lo, hi;
  std::string file;
};

struct RegionSpec {
  std::string kind;  ///< ball, halfspace, cayley
  std::vector<double> center;
  double radius = 1.0;
  std::vector<double> normal;
  double offset = 0.0;
};

struct Tolerances {
  double defect_sigma = 3.0;     ///< nonnegativity: defect >= -sigma * est_error
  double strict_factor = 10.0;   ///< strictness: defect > factor * est_error
  double quotient_slack = 2.0;   ///< symmetrization: drop per step <= slack * est_error
  double fit_error = 0.05;       ///< symmetrization: final extremizer fit
  double hemiball = 1e-6;        ///< relative mass imbalance
  double invariance = 1e-3;      ///< pointwise invariance deviation
  double mass_identity = 1e-3;   ///< coefficient of variation
  double invariant_fit = 1e-3;   ///< relative L^1 fit error
};

struct HemiballSpec {
  std::vector<double> center;     ///< centred hemi-ball, or
  std::vector<double> direction;  ///< ray direction with parameter u
  double u = 1.0;
};

struct LizhuSpec {
  std::vector<std::vector<double>> centers;  ///< mass identity centres
  std::vector<std::vector<double>> probes;   ///< radial derivative points
  std::vector<double> origin;                ///< radial/decreasing origin
};

struct RunConfig {
  Command command = Command::energy;
  KernelParams kernel;
  GridSpec grid;
  FunctionSpec function;
  std::optional<RegionSpec> region;
  Tolerances tol;
  std::uint64_t seed = 0;
  Schedule schedule;
  HemiballSpec hemiball;
  LizhuSpec lizhu;
  std::string example = "bumps";  ///< counterexample: bumps or newton
  std::filesystem::path base_dir;  ///< relative file paths resolve here
};

/// Parses and validates a JSON run configuration. Errors name the offending
/// key path or the line and column of a syntax error.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

Grid make_grid(const RunConfig& cfg);
Field make_function(const RunConfig& cfg);
Region make_region(const RunConfig& cfg);

}  // namespace hls::cli
