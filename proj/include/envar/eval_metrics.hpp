#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envar/synth.hpp"

namespace envar {

struct Correlation {
  std::optional<double> r;  // empty when not significant (p >= 0.05) or undefined
  double r_raw = 0.0;
  double p_value = 1.0;
  int n = 0;
};

/// Pearson r with a two-sided t-test (df = n - 2). Undefined (zero variance or
/// n < 3) gives r_raw = 0, p = 1.
Correlation pearson(const Vector& x, const Vector& y, double gate = 0.05);

struct ScoreReport {
  double sf_oad = 0.0;
  double obs_oad = 0.0;
  Correlation phi;
  Correlation sigma_u;
  Correlation a0;  // off-diagonal entries only
  Correlation a1;
  std::string method_name;
  int p = 0;
  int episode = 0;
};

struct CentralityReport {
  std::vector<int> in_degree;
  std::vector<int> out_degree;
  std::vector<int> net_flow;
};

using Adjacency = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Scores `estimate` against the truth's equivalence class. The one-sided
/// discrepancies use the truth as reference.
ScoreReport score(const StructuralModel& estimate, const GroundTruthInstance& truth,
                  double eta = 1.0, const std::string& method_name = "");

/// Keeps, separately in A0 (off-diagonal) and A1, the strongest entries whose
/// absolute weights first reach `mass` of the matrix total, then ORs the two.
Adjacency binarize_cumulative(const StructuralModel& m, double mass = 0.85);

/// Entry (i, j) != 0 means j -> i: in_degree[i] is row sum i, out_degree[j] is
/// column sum j.
CentralityReport centralities(const Adjacency& adj);

}  // namespace envar
