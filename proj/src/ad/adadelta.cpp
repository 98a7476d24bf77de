#include "qa4ie/ad/adadelta.hpp"

#include <cmath>

namespace qa4ie::ad {

AdaDelta::AdaDelta(AdaDeltaConfig config) : config_(config) {
  if (!(config_.rho > 0.0 && config_.rho < 1.0)) throw std::invalid_argument("adadelta: rho must lie in (0, 1)");
  if (!(config_.epsilon > 0.0)) throw std::invalid_argument("adadelta: epsilon must be positive");
  if (!(config_.lr >= 0.0)) throw std::invalid_argument("adadelta: lr must be non-negative");
}

void AdaDelta::step(ParameterSet& params) {
  for (const Parameter* p : params.all()) {
    if (p->grad.shape() != p->value.shape()) {
      throw ShapeError("adadelta: grad " + to_string(p->grad.shape()) + " vs parameter " +
                       to_string(p->value.shape()) + " for '" + p->name + "'");
    }
    if (!p->grad.all_finite()) throw NumericError("adadelta: non-finite gradient in '" + p->name + "'");
  }
  const double rho = config_.rho, eps = config_.epsilon, lr = config_.lr;
  for (Parameter* p : params.all()) {
    auto it = slots_.find(p->name);
    if (it == slots_.end()) {
      it = slots_.emplace(p->name, Slot{Tensor(p->value.shape()), Tensor(p->value.shape())}).first;
    } else if (it->second.acc_grad_sq.shape() != p->value.shape()) {
      throw ShapeError("adadelta: state for '" + p->name + "' has shape " +
                       to_string(it->second.acc_grad_sq.shape()));
    }
    auto theta = p->value.data();
    auto g = p->grad.data();
    auto eg = it->second.acc_grad_sq.data();
    auto eu = it->second.acc_update_sq.data();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      eg[k] = rho * eg[k] + (1.0 - rho) * g[k] * g[k];
      const double u = std::sqrt(eu[k] + eps) / std::sqrt(eg[k] + eps) * g[k];
      eu[k] = rho * eu[k] + (1.0 - rho) * u * u;
      theta[k] -= lr * u;
    }
  }
}

}  // namespace qa4ie::ad
