#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace radarnet::cmaes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Options {
  int dimension = 0;
  double sigma0 = 0.5;
  int lambda = 0;  // 0 selects 4 + floor(3 ln d)
  int generations = 100;
  std::uint64_t seed = 1;
  Vector mean0;  // empty selects the origin
};

int default_lambda(int dimension);

struct GenerationRecord {
  int generation = 0;
  double best = 0.0;       // best fitness within the generation
  double mean = 0.0;       // mean fitness of the population
  double best_ever = 0.0;
  double sigma = 0.0;
};

// Maximizing CMA-ES with rank-one and rank-mu covariance updates and
// cumulative step-size adaptation, default strategy constants.
class Optimizer {
 public:
  explicit Optimizer(const Options& options);

  int dimension() const { return dim_; }
  int lambda() const { return lambda_; }
  int mu() const { return mu_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  const Vector& best_x() const { return best_x_; }
  double best_fitness() const { return best_fitness_; }
  const std::vector<GenerationRecord>& history() const { return history_; }
  const std::vector<std::string>& events() const { return events_; }

  // Samples one generation. Must be followed by tell() with as many values.
  std::vector<Vector> ask();
  void tell(const std::vector<double>& fitness);

  // Full state including the sampler, so a restored optimizer continues the
  // same sequence.
  nlohmann::json to_json() const;
  static Optimizer from_json(const nlohmann::json& j);

 private:
  Optimizer() = default;
  void init_constants();
  void decompose();

  int dim_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  Vector weights_;
  double mu_eff_ = 0.0, c_sigma_ = 0.0, d_sigma_ = 0.0, c_c_ = 0.0, c_1_ = 0.0, c_mu_ = 0.0;
  double chi_n_ = 0.0;

  Vector mean_;
  double sigma_ = 0.0;
  Matrix cov_;
  Matrix basis_;  // eigenvectors of cov_
  Vector scales_;  // sqrt of eigenvalues
  Vector p_sigma_, p_c_;
  int generation_ = 0;

  std::vector<Vector> pending_z_;
  std::vector<Vector> pending_x_;

  Vector best_x_;
  double best_fitness_ = -std::numeric_limits<double>::infinity();
  std::vector<GenerationRecord> history_;
  std::vector<std::string> events_;
  std::mt19937_64 rng_;
};

// Evaluates a whole population at once so callers can parallelize.
using BatchObjective = std::function<std::vector<double>(const std::vector<Vector>&)>;

struct Result {
  Vector best_x;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;
  std::vector<std::string> events;
};

Result optimize(const BatchObjective& objective, const Options& options);
Result optimize(const std::function<double(const Vector&)>& objective, const Options& options);

}  // namespace radarnet::cmaes
