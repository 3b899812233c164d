#include "radarnet/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace radarnet::cmaes {
namespace {

using nlohmann::json;

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

int default_lambda(int dimension) {
  if (dimension < 1) throw std::invalid_argument("CMA-ES dimension must be >= 1");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

Optimizer::Optimizer(const Options& options) : rng_(options.seed) {
  if (options.dimension < 1) throw std::invalid_argument("CMA-ES dimension must be >= 1");
  if (!(options.sigma0 > 0.0)) throw std::invalid_argument("CMA-ES sigma0 must be > 0");
  dim_ = options.dimension;
  lambda_ = options.lambda > 0 ? options.lambda : default_lambda(dim_);
  if (lambda_ < 4) throw std::invalid_argument("CMA-ES lambda must be >= 4");
  init_constants();

  if (options.mean0.size() == 0) {
    mean_ = Vector::Zero(dim_);
  } else if (options.mean0.size() == dim_) {
    mean_ = options.mean0;
  } else {
    throw std::invalid_argument("CMA-ES mean0 has the wrong dimension");
  }
  sigma_ = options.sigma0;
  cov_ = Matrix::Identity(dim_, dim_);
  basis_ = Matrix::Identity(dim_, dim_);
  scales_ = Vector::Ones(dim_);
  p_sigma_ = Vector::Zero(dim_);
  p_c_ = Vector::Zero(dim_);
  best_x_ = mean_;
}

void Optimizer::init_constants() {
  const double n = dim_;
  mu_ = lambda_ / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) weights_(i) = std::log((lambda_ + 1) / 2.0) - std::log(i + 1.0);
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();
  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
}

void Optimizer::decompose() {
  cov_ = (0.5 * (cov_ + cov_.transpose())).eval();  // eval: transpose aliases cov_
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_);
  Vector values = eig.eigenvalues();
  const double floor = std::max(values.maxCoeff(), 1.0) * 1e-14;
  if (values.minCoeff() < floor) {
    std::ostringstream msg;
    msg << "generation " << generation_ << ": covariance eigenvalue " << values.minCoeff()
        << " floored to " << floor;
    events_.push_back(msg.str());
    values = values.cwiseMax(floor);
    cov_ = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  }
  basis_ = eig.eigenvectors();
  scales_ = values.cwiseSqrt();
}

std::vector<Vector> Optimizer::ask() {
  std::normal_distribution<double> g(0.0, 1.0);
  pending_z_.assign(lambda_, Vector(dim_));
  pending_x_.assign(lambda_, Vector(dim_));
  for (int k = 0; k < lambda_; ++k) {
    for (int d = 0; d < dim_; ++d) pending_z_[k](d) = g(rng_);
    pending_x_[k] = mean_ + sigma_ * (basis_ * scales_.cwiseProduct(pending_z_[k]));
  }
  return pending_x_;
}

void Optimizer::tell(const std::vector<double>& fitness) {
  if (static_cast<int>(fitness.size()) != lambda_ || pending_x_.empty()) {
    throw std::logic_error("CMA-ES tell() must follow ask() with lambda values");
  }
  for (double f : fitness) {
    if (!std::isfinite(f)) throw std::runtime_error("CMA-ES received a non-finite fitness");
  }
  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness[a] > fitness[b]; });

  GenerationRecord rec;
  rec.generation = generation_;
  rec.best = fitness[order[0]];
  rec.mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) / lambda_;
  if (rec.best > best_fitness_) {
    best_fitness_ = rec.best;
    best_x_ = pending_x_[order[0]];
  }

  const double n = dim_;
  Vector y_w = Vector::Zero(dim_);
  Vector z_w = Vector::Zero(dim_);
  Matrix rank_mu = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < mu_; ++i) {
    const Vector y = (pending_x_[order[i]] - mean_) / sigma_;
    y_w += weights_(i) * y;
    z_w += weights_(i) * pending_z_[order[i]];
    rank_mu += weights_(i) * y * y.transpose();
  }
  mean_ += sigma_ * y_w;

  // C^-1/2 y_w = B z_w
  p_sigma_ = (1.0 - c_sigma_) * p_sigma_ +
             std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * (basis_ * z_w);
  const double ps_norm = p_sigma_.norm();
  const double decay = 1.0 - std::pow(1.0 - c_sigma_, 2.0 * (generation_ + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * chi_n_;
  p_c_ = (1.0 - c_c_) * p_c_ +
         (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_w;
  const double delta_h = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
  cov_ = (1.0 - c_1_ - c_mu_ + c_1_ * delta_h) * cov_ + c_1_ * p_c_ * p_c_.transpose() +
         c_mu_ * rank_mu;
  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

  ++generation_;
  decompose();
  rec.best_ever = best_fitness_;
  rec.sigma = sigma_;
  history_.push_back(rec);
  pending_x_.clear();
  pending_z_.clear();
}

nlohmann::json Optimizer::to_json() const {
  json j;
  j["dimension"] = dim_;
  j["lambda"] = lambda_;
  j["generation"] = generation_;
  j["mean"] = vector_json(mean_);
  j["sigma"] = sigma_;
  j["cov"] = vector_json(Eigen::Map<const Vector>(cov_.data(), cov_.size()));
  j["p_sigma"] = vector_json(p_sigma_);
  j["p_c"] = vector_json(p_c_);
  j["best_x"] = vector_json(best_x_);
  j["best_fitness"] = best_fitness_;
  j["history"] = json::array();
  for (const auto& h : history_) {
    j["history"].push_back({{"generation", h.generation},
                            {"best", h.best},
                            {"mean", h.mean},
                            {"best_ever", h.best_ever},
                            {"sigma", h.sigma}});
  }
  j["events"] = events_;
  std::ostringstream rng;
  rng << rng_;
  j["rng"] = rng.str();
  return j;
}

Optimizer Optimizer::from_json(const nlohmann::json& j) {
  Optimizer o;
  o.dim_ = j.at("dimension").get<int>();
  o.lambda_ = j.at("lambda").get<int>();
  if (o.dim_ < 1 || o.lambda_ < 4) throw std::invalid_argument("bad CMA-ES state");
  o.init_constants();
  o.generation_ = j.at("generation").get<int>();
  o.mean_ = vector_from(j.at("mean"));
  o.sigma_ = j.at("sigma").get<double>();
  const Vector cov = vector_from(j.at("cov"));
  if (cov.size() != o.dim_ * o.dim_ || o.mean_.size() != o.dim_) {
    throw std::invalid_argument("CMA-ES state has inconsistent dimensions");
  }
  o.cov_ = Eigen::Map<const Matrix>(cov.data(), o.dim_, o.dim_);
  o.p_sigma_ = vector_from(j.at("p_sigma"));
  o.p_c_ = vector_from(j.at("p_c"));
  o.best_x_ = vector_from(j.at("best_x"));
  o.best_fitness_ = j.at("best_fitness").is_null() ? -std::numeric_limits<double>::infinity()
                                                   : j.at("best_fitness").get<double>();
  for (const auto& h : j.at("history")) {
    o.history_.push_back({h.at("generation").get<int>(), h.at("best").get<double>(),
                          h.at("mean").get<double>(), h.at("best_ever").get<double>(),
                          h.at("sigma").get<double>()});
  }
  o.events_ = j.at("events").get<std::vector<std::string>>();
  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> o.rng_;
  o.decompose();
  return o;
}

Result optimize(const BatchObjective& objective, const Options& options) {
  if (options.generations < 1) throw std::invalid_argument("CMA-ES generations must be >= 1");
  Optimizer opt(options);
  for (int g = 0; g < options.generations; ++g) {
    const std::vector<Vector> population = opt.ask();
    opt.tell(objective(population));
  }
  return {opt.best_x(), opt.best_fitness(), opt.history(), opt.events()};
}

Result optimize(const std::function<double(const Vector&)>& objective, const Options& options) {
  return optimize(
      [&](const std::vector<Vector>& xs) {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const Vector& x : xs) out.push_back(objective(x));
        return out;
      },
      options);
}

}  // namespace radarnet::cmaes
