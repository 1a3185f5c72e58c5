#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qslice/montecarlo.hpp"

namespace qslice::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kCapacity = 2 };

/// Fixed parameters of a published figure: `param` is swept over `grid`
/// once for every value of `curve_param` in `curves`.
struct FigurePreset {
  std::string name;
  ScenarioParams base;
  SweepParameter param;
  std::vector<double> grid;
  SweepParameter curve_param;
  std::vector<double> curves;
};

/// "fig2", "fig4" or "fig5"; InvalidInput otherwise.
FigurePreset figure_preset(std::string_view name);

/// Flow sizes used for the P(A|B) curve.
std::vector<std::size_t> fig3_flow_sizes();

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qslice::cli
