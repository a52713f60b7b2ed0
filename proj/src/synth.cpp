#include "envar/synth.hpp"

#include <cmath>

namespace envar {

namespace {

constexpr int kMaxRetries = 20;
constexpr int kMaxScalings = 100;
constexpr double kSlack = 0.999;
constexpr double kSigmaFloor = 0.05;

enum Stream : std::uint32_t { kGraph = 1, kNoise = 2 };

std::mt19937_64 stream_rng(std::uint64_t seed, int episode, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, "GeneratorConfig: " + msg); };
  if (p < 1) fail("p must be positive");
  if (t_len < 2) fail("t_len must be at least 2");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) fail("edge_prob must lie in [0, 1]");
  if (!(weight_low < weight_high)) fail("weight_low must be below weight_high");
  if (!(spectral_cap > 0.0 && spectral_cap < 1.0)) fail("spectral_cap must lie in (0, 1)");
  if (!(sigma_nom > 0.0)) fail("sigma_nom must be positive");
  if (!(sigma_std >= 0.0)) fail("sigma_std must be nonnegative");
  if (episodes < 1) fail("episodes must be positive");
  if (burn_in < 0) fail("burn_in must be nonnegative");
}

ReducedForm GroundTruthInstance::reduced_form() const {
  Eigen::PartialPivLU<Matrix> lu(model.b());
  const Matrix mix = lu.inverse() * per_node_sigmas.asDiagonal();
  return ReducedForm(lu.solve(model.a1), symmetrize(mix * mix.transpose()));
}

Matrix sample_weights(int p, double edge_prob, double low, double high, bool hollow,
                      std::mt19937_64& rng) {
  std::bernoulli_distribution edge(edge_prob);
  std::uniform_real_distribution<double> weight(low, high);
  Matrix w = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (hollow && i == j) continue;
      if (edge(rng)) w(i, j) = weight(rng);
    }
  return w;
}

double floor_node_sigma(double draw, double sigma_nom) {
  return std::max(draw, kSigmaFloor * sigma_nom);
}

GroundTruthInstance generate_instance(const GeneratorConfig& cfg, int episode) {
  cfg.validate();
  if (episode < 0) throw Error(ErrorKind::InvalidConfig, "generate_instance: negative episode");
  const int p = cfg.p;
  auto graph_rng = stream_rng(cfg.seed, cfg.fresh_graph ? episode : 0, kGraph);
  auto noise_rng = stream_rng(cfg.seed, episode, kNoise);

  Matrix a0, a1;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
    a0 = sample_weights(p, cfg.edge_prob, cfg.weight_low, cfg.weight_high, true, graph_rng);
    a1 = sample_weights(p, cfg.edge_prob, cfg.weight_low, cfg.weight_high, false, graph_rng);
    const double rho0 = spectral_radius(a0);
    if (rho0 > cfg.spectral_cap) a0 *= cfg.spectral_cap / rho0 * kSlack;

    const Matrix b = Matrix::Identity(p, p) - a0;
    Eigen::JacobiSVD<Matrix> svd(b);
    const auto& sv = svd.singularValues();
    if (!(sv(p - 1) > Tolerances{}.inv * sv(0))) continue;

    Eigen::PartialPivLU<Matrix> lu(b);
    for (int k = 0; k < kMaxScalings; ++k) {
      const double rho = spectral_radius(lu.solve(a1));
      if (rho <= cfg.spectral_cap) {
        ok = true;
        break;
      }
      a1 *= cfg.spectral_cap / rho * kSlack;
    }
  }
  if (!ok) throw Error(ErrorKind::Generation, "generate_instance: could not draw an admissible graph");

  GroundTruthInstance inst;
  inst.episode_index = episode;
  inst.model = StructuralModel(a0, a1, cfg.sigma_nom);
  inst.per_node_sigmas.resize(p);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < p; ++i) {
    const double draw = cfg.sigma_nom + cfg.sigma_std * normal(noise_rng);
    inst.per_node_sigmas(i) = floor_node_sigma(draw, cfg.sigma_nom);
    if (inst.per_node_sigmas(i) != draw) ++inst.truncations;
  }
  const std::uint64_t sim_seed = noise_rng();
  inst.series = simulate(inst.model, inst.per_node_sigmas, cfg.t_len, sim_seed, cfg.burn_in);
  return inst;
}

std::vector<GeneratorConfig> default_benchmark_grid() {
  std::vector<GeneratorConfig> grid;
  for (int p : {5, 10, 15, 25, 50, 75, 100})
    for (double s : {0.00, 0.025, 0.075, 0.10, 0.15}) {
      GeneratorConfig cfg;
      cfg.p = p;
      cfg.t_len = 1000;
      cfg.sigma_std = s;
      cfg.episodes = 5;
      grid.push_back(cfg);
    }
  return grid;
}

}  // namespace envar
