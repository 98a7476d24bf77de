#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "qa4ie/ad/graph.hpp"

namespace qa4ie::ad {

struct GradCheckOptions {
  double h = 1e-5;
  // Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 1;
  // Only used for the over_tolerance count.
  double tolerance = 1e-4;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t over_tolerance = 0;
  double max_abs_error = 0.0;
};

// Builds a scalar loss in the given graph from the current parameter values.
// Must be deterministic.
using LossBuilder = std::function<Var(Graph&)>;

// Compares reverse-mode gradients with central differences
//   |a - (f(x+h) - f(x-h)) / 2h| / max(1e-8, |a| + |numeric|)
// and returns the largest such error over the checked coordinates. Leaves
// parameter values unchanged and their grads holding the analytic result.
GradCheckResult finite_difference_check(const LossBuilder& build, std::span<Parameter* const> params,
                                        const GradCheckOptions& options = {});

}  // namespace qa4ie::ad
