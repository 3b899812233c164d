#include "radarnet/critic.hpp"

#include <stdexcept>

namespace radarnet::nn {

CriticNet CriticNet::make(int input_size, std::mt19937_64& rng, int hidden) {
  CriticNet c;
  c.spec = DenseSpec({input_size, hidden, hidden, 1},
                     {Activation::kTanh, Activation::kTanh, Activation::kLinear});
  c.params = Vector::Zero(c.spec.num_params());
  c.spec.initialize(c.params, rng, 1.0, 0.1);
  return c;
}

double CriticNet::forward(const Vector& summary) const {
  Matrix x(1, summary.size());
  x.row(0) = summary.transpose();
  return spec.forward(params, x)(0, 0);
}

Vector CriticNet::forward(const Matrix& summaries, DenseSpec::Cache* cache) const {
  return spec.forward(params, summaries, cache).col(0);
}

void CriticNet::backward(const DenseSpec::Cache& cache, const Vector& d_values,
                         ParamSpan grad) const {
  Matrix d(d_values.size(), 1);
  d.col(0) = d_values;
  spec.backward(params, cache, d, grad);
}

nlohmann::json CriticNet::to_json() const {
  return {{"spec", spec.to_json()}, {"params", vector_to_json(params)}};
}

CriticNet CriticNet::from_json(const nlohmann::json& j) {
  CriticNet c;
  c.spec = DenseSpec::from_json(j.at("spec"));
  if (c.spec.output_size() != 1) throw std::invalid_argument("critic must output one value");
  c.params = vector_from_json(j.at("params"));
  if (c.params.size() != c.spec.num_params()) {
    throw std::invalid_argument("critic parameter count mismatch");
  }
  if (!c.params.allFinite()) throw std::invalid_argument("critic parameters not finite");
  return c;
}

int summary_size(int num_radars, int feature_width) { return num_radars * feature_width + 3; }

Vector pooled_features(const ActorNet& actor, const Matrix& rows) {
  const Matrix f = actor.extractor.forward(actor.params.head(actor.extractor.num_params()), rows);
  return f.colwise().mean().transpose();
}

Vector make_summary(std::span<const Vector> pooled, double step_fraction, double done_fraction,
                    double committed_fraction) {
  if (pooled.empty()) throw std::invalid_argument("summary needs at least one radar");
  const Eigen::Index f = pooled.front().size();
  Vector s(static_cast<Eigen::Index>(pooled.size()) * f + 3);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    if (pooled[i].size() != f) throw std::invalid_argument("pooled width mismatch");
    s.segment(static_cast<Eigen::Index>(i) * f, f) = pooled[i];
  }
  s.tail(3) << step_fraction, done_fraction, committed_fraction;
  return s;
}

}  // namespace radarnet::nn
