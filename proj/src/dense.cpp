#include "radarnet/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace radarnet::nn {
namespace {

using RowMap = Eigen::Map<const Matrix>;

void activate(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      z = z.unaryExpr([](double v) { return std::tanh(v); });  // scalar on every element
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
  }
}

// Multiplies `d` in place by the activation derivative, given the output.
void activation_backward(Matrix& d, const Matrix& y, Activation a) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      d.array() *= 1.0 - y.array().square();
      break;
    case Activation::kRelu:
      d.array() *= (y.array() > 0.0).cast<double>();
      break;
  }
}

}  // namespace

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation " + name);
}

DenseSpec::DenseSpec(std::vector<int> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2 || activations_.size() != sizes_.size() - 1) {
    throw std::invalid_argument("dense net needs L + 1 sizes and L activations");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("layer sizes must be >= 1");
    offsets_.push_back(offsets_.back() + sizes_[l + 1] * sizes_[l] + sizes_[l + 1]);
  }
}

Matrix DenseSpec::forward(ConstParamSpan params, const Matrix& x, Cache* cache) const {
  if (params.size() != num_params()) throw std::invalid_argument("parameter count mismatch");
  if (x.cols() != input_size()) throw std::invalid_argument("input width mismatch");
  if (cache) cache->inputs.clear();
  Matrix h = x;
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const RowMap w(params.data() + offsets_[l], out, in);
    const Eigen::Map<const Eigen::RowVectorXd> b(params.data() + offsets_[l] + out * in, out);
    if (cache) cache->inputs.push_back(h);
    // Fixed per-row summation order: a row's output never depends on its
    // position in the batch, which keeps weight-shared nets exactly
    // permutation-equivariant.
    Matrix z(h.rows(), out);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const double* xr = h.data() + r * in;
      for (int o = 0; o < out; ++o) {
        const double* wo = w.data() + static_cast<std::ptrdiff_t>(o) * in;
        double acc = b(o);
        for (int k = 0; k < in; ++k) acc += wo[k] * xr[k];
        z(r, o) = acc;
      }
    }
    activate(z, activations_[l]);
    h = std::move(z);
  }
  if (cache) cache->output = h;
  return h;
}

Matrix DenseSpec::backward(ConstParamSpan params, const Cache& cache, const Matrix& d_output,
                           ParamSpan grad) const {
  if (grad.size() != num_params()) throw std::invalid_argument("gradient size mismatch");
  Matrix d = d_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Matrix& y = (l == num_layers() - 1) ? cache.output : cache.inputs[l + 1];
    activation_backward(d, y, activations_[l]);
    const Matrix& x = cache.inputs[l];
    Eigen::Map<Matrix> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + offsets_[l] + out * in, out);
    gw.noalias() += d.transpose() * x;
    gb += d.colwise().sum();
    const RowMap w(params.data() + offsets_[l], out, in);
    d = d * w;
  }
  return d;
}

void DenseSpec::initialize(ParamSpan params, std::mt19937_64& rng, double gain,
                           double last_gain) const {
  if (params.size() != num_params()) throw std::invalid_argument("parameter count mismatch");
  params.setZero();
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double g = (l == num_layers() - 1) ? last_gain : gain;
    const double limit = g * std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (int k = 0; k < out * in; ++k) params(offsets_[l] + k) = u(rng);
  }
}

nlohmann::json DenseSpec::to_json() const {
  std::vector<std::string> acts;
  for (Activation a : activations_) acts.push_back(activation_name(a));
  return {{"sizes", sizes_}, {"activations", acts}};
}

DenseSpec DenseSpec::from_json(const nlohmann::json& j) {
  std::vector<Activation> acts;
  for (const auto& a : j.at("activations")) acts.push_back(parse_activation(a.get<std::string>()));
  return DenseSpec(j.at("sizes").get<std::vector<int>>(), acts);
}

DenseNet::DenseNet(DenseSpec s, std::mt19937_64& rng, double last_gain)
    : spec(std::move(s)), params(Vector::Zero(spec.num_params())),
      grads(Vector::Zero(spec.num_params())) {
  spec.initialize(params, rng, 1.0, last_gain);
}

void Adam::step(ParamSpan params, ConstParamSpan grads) {
  if (m.size() != params.size()) {
    m = Vector::Zero(params.size());
    v = Vector::Zero(params.size());
    step_count = 0;
  }
  ++step_count;
  m = beta1 * m + (1.0 - beta1) * grads;
  v = beta2 * v + (1.0 - beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

nlohmann::json Adam::to_json() const {
  return {{"lr", lr},      {"beta1", beta1},           {"beta2", beta2},
          {"eps", eps},    {"m", vector_to_json(m)},   {"v", vector_to_json(v)},
          {"step", step_count}};
}

Adam Adam::from_json(const nlohmann::json& j) {
  Adam a;
  a.lr = j.at("lr").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.eps = j.at("eps").get<double>();
  a.m = vector_from_json(j.at("m"));
  a.v = vector_from_json(j.at("v"));
  a.step_count = j.at("step").get<long>();
  return a;
}

double grad_check(const std::function<double(const Vector&)>& loss,
                  const std::function<Vector(const Vector&)>& gradient, const Vector& at, double h,
                  double floor) {
  const Vector analytic = gradient(at);
  if (analytic.size() != at.size()) throw std::invalid_argument("gradient size mismatch");
  double worst = 0.0;
  Vector x = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    x(i) = at(i) + h;
    const double up = loss(x);
    x(i) = at(i) - h;
    const double down = loss(x);
    x(i) = at(i);
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic(i) - numeric) / denom);
  }
  return worst;
}

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace radarnet::nn
