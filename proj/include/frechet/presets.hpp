#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frechet/simulation.hpp"

namespace frechet::sim {

/// Canned study parameterizations used by `simulate --preset`.
inline std::optional<PowerStudyConfig> preset_study(const std::string& name) {
  PowerStudyConfig cfg;
  auto add_cells = [&cfg](const std::vector<int>& sizes, const std::vector<double>& betas,
                          const std::vector<double>& gammas) {
    for (int n : sizes)
      for (std::size_t i = 0; i < betas.size(); ++i)
        cfg.cells.push_back(PowerCell{betas[i], gammas[i], n});
  };

  if (name == "paper-network-global") {
    cfg.kind = TestKind::Global;
    cfg.space = SimSpace::Network;
    add_cells({200, 300, 500}, {0.0, 0.1, 0.2, 0.3}, {0.0, 0.1, 0.2, 0.3});
    return cfg;
  }
  if (name == "paper-network-partial") {
    cfg.kind = TestKind::Partial;
    cfg.space = SimSpace::Network;
    cfg.network.beta = 0.25;
    add_cells({200, 300, 500}, {0.25, 0.25, 0.25, 0.25}, {0.0, 0.2, 0.4, 0.6});
    return cfg;
  }
  if (name == "paper-sphere-global") {
    cfg.kind = TestKind::Global;
    cfg.space = SimSpace::Sphere;
    add_cells({200, 300, 500, 1000}, {0.0, 0.05, 0.1, 0.15, 0.2}, {0.0, 0.05, 0.1, 0.15, 0.2});
    return cfg;
  }
  if (name == "paper-sphere-partial") {
    cfg.kind = TestKind::Partial;
    cfg.space = SimSpace::Sphere;
    cfg.sphere.beta = M_PI / 12;
    const double b = M_PI / 12;
    add_cells({200, 300, 500, 1000}, {b, b, b, b}, {0.0, 0.1, 0.2, 0.3});
    return cfg;
  }
  return std::nullopt;
}

inline std::vector<std::string> preset_names() {
  return {"paper-network-global", "paper-network-partial", "paper-sphere-global",
          "paper-sphere-partial"};
}

}  // namespace frechet::sim
