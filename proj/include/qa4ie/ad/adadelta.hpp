#pragma once

#include <map>
#include <string>

#include "qa4ie/ad/graph.hpp"

namespace qa4ie::ad {

struct AdaDeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
  double lr = 2.0;
};

// AdaDelta with a learning-rate multiplier on the applied update:
//   E[g^2] <- rho E[g^2] + (1 - rho) g^2
//   u      =  sqrt(E[u^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[u^2] <- rho E[u^2] + (1 - rho) u^2
//   theta  <- theta - lr * u
class AdaDelta {
 public:
  struct Slot {
    Tensor acc_grad_sq;
    Tensor acc_update_sq;
  };

  explicit AdaDelta(AdaDeltaConfig config = {});

  // Applies one update from each parameter's accumulated grad. Throws
  // NumericError without touching any parameter if a gradient is non-finite.
  void step(ParameterSet& params);

  const AdaDeltaConfig& config() const { return config_; }
  const Slot& slot(const std::string& name) const { return slots_.at(name); }

 private:
  AdaDeltaConfig config_;
  std::map<std::string, Slot> slots_;
};

}  // namespace qa4ie::ad
