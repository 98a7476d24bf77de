#include "qa4ie/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qa4ie::ad {

namespace {

double evaluate(const LossBuilder& build, const Parameter& p, std::size_t index) {
  const auto fail = [&](const std::string& detail) {
    return NumericError("gradcheck: loss is non-finite at " + p.name + "[" + std::to_string(index) + "]" + detail);
  };
  double v = 0.0;
  try {
    Graph g;
    v = build(g).value().item();
  } catch (const NumericError& e) {
    throw fail(std::string(": ") + e.what());
  }
  if (!std::isfinite(v)) throw fail("");
  return v;
}

}  // namespace

GradCheckResult finite_difference_check(const LossBuilder& build, std::span<Parameter* const> params,
                                        const GradCheckOptions& options) {
  if (!(options.h > 0.0)) throw std::invalid_argument("gradcheck: step must be positive");
  for (Parameter* p : params) p->grad.fill(0.0);
  {
    Graph g;
    Var loss = build(g);
    g.backward(loss);
  }
  Rng rng(options.seed);
  GradCheckResult result;
  for (Parameter* p : params) {
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param != 0 && coords.size() > options.max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      double& x = p->value[idx];
      const double saved = x;
      x = saved + options.h;
      const double plus = evaluate(build, *p, idx);
      x = saved - options.h;
      const double minus = evaluate(build, *p, idx);
      x = saved;
      const double numeric = (plus - minus) / (2.0 * options.h);
      const double analytic = p->grad[idx];
      const double err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++result.checked;
      if (err > options.tolerance) ++result.over_tolerance;
      result.max_abs_error = std::max(result.max_abs_error, std::abs(analytic - numeric));
      if (err > result.max_rel_error || result.worst_param.empty()) {
        result.max_rel_error = err;
        result.worst_param = p->name;
        result.worst_index = idx;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace qa4ie::ad
