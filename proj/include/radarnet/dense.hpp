#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace radarnet::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ParamSpan = Eigen::Ref<Vector>;
using ConstParamSpan = Eigen::Ref<const Vector>;

enum class Activation { kLinear, kTanh, kRelu };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Fully connected stack over a flat parameter vector. Layer l stores W_l
// (out x in, row-major) followed by b_l. Inputs are batches, one row per
// sample.
class DenseSpec {
 public:
  DenseSpec() = default;
  DenseSpec(std::vector<int> sizes, std::vector<Activation> activations);

  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(activations_.size()); }
  int num_params() const { return offsets_.back(); }

  // Per-layer inputs and post-activation outputs, kept for backward().
  struct Cache {
    std::vector<Matrix> inputs;
    Matrix output;
  };

  Matrix forward(ConstParamSpan params, const Matrix& x, Cache* cache = nullptr) const;
  // Adds dL/dparams to `grad` and returns dL/dx.
  Matrix backward(ConstParamSpan params, const Cache& cache, const Matrix& d_output,
                  ParamSpan grad) const;

  // Uniform Glorot weights scaled by `gain`, zero biases; the last layer is
  // scaled by `last_gain` instead.
  void initialize(ParamSpan params, std::mt19937_64& rng, double gain = 1.0,
                  double last_gain = 1.0) const;

  nlohmann::json to_json() const;
  static DenseSpec from_json(const nlohmann::json& j);

 private:
  std::vector<int> sizes_;
  std::vector<Activation> activations_;
  std::vector<int> offsets_ = {0};
};

// A DenseSpec that owns its parameters and gradient buffer.
struct DenseNet {
  DenseSpec spec;
  Vector params;
  Vector grads;

  DenseNet() = default;
  DenseNet(DenseSpec s, std::mt19937_64& rng, double last_gain = 1.0);

  Matrix forward(const Matrix& x, DenseSpec::Cache* cache = nullptr) const {
    return spec.forward(params, x, cache);
  }
  Matrix backward(const DenseSpec::Cache& cache, const Matrix& d_output) {
    return spec.backward(params, cache, d_output, grads);
  }
  void zero_grad() { grads.setZero(params.size()); }
};

struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vector m;
  Vector v;
  long step_count = 0;

  // Descent step on a loss gradient.
  void step(ParamSpan params, ConstParamSpan grads);

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);
};

// Central differences with step h against the analytic gradient. Returns the
// largest |analytic - numeric| / max(|analytic|, |numeric|, floor).
double grad_check(const std::function<double(const Vector&)>& loss,
                  const std::function<Vector(const Vector&)>& gradient, const Vector& at,
                  double h = 1e-5, double floor = 1e-6);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace radarnet::nn
