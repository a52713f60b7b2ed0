#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "envar/model.hpp"

namespace envar {

struct GeneratorConfig {
  int p = 5;
  int t_len = 1000;
  double edge_prob = 0.3;
  double weight_low = -1.0;
  double weight_high = 1.0;
  double spectral_cap = 0.85;
  double sigma_nom = 1.0;
  double sigma_std = 0.0;
  std::uint64_t seed = 0;
  int episodes = 5;
  int burn_in = 100;
  /// true: every episode draws a new graph; false: episodes share the graph of
  /// episode 0 and differ only in noise.
  bool fresh_graph = true;

  void validate() const;
};

struct GroundTruthInstance {
  StructuralModel model;  // sigma = sigma_nom
  Vector per_node_sigmas;
  TimeSeries series;
  int episode_index = 0;
  int truncations = 0;  // node sigmas raised to the positivity floor

  /// Reduced form under the per-node noise: Sigma_u = B^{-1} diag(s^2) B^{-T}.
  ReducedForm reduced_form() const;
};

/// Draw a weight matrix with Bernoulli(edge_prob) support and U(low, high)
/// weights; `hollow` forces a zero diagonal.
Matrix sample_weights(int p, double edge_prob, double low, double high, bool hollow,
                      std::mt19937_64& rng);

/// max(draw, 0.05 sigma_nom)
double floor_node_sigma(double draw, double sigma_nom);

/// Deterministic in (cfg.seed, episode). The graph and node-sigma z-scores do not
/// depend on sigma_std, so instances at different sigma_std share them.
GroundTruthInstance generate_instance(const GeneratorConfig& cfg, int episode);

/// p in {5, 10, 15, 25, 50, 75, 100} x sigma_std in {0, 0.025, 0.075, 0.10, 0.15},
/// T = 1000, 5 episodes; p varies slowest.
std::vector<GeneratorConfig> default_benchmark_grid();

}  // namespace envar
