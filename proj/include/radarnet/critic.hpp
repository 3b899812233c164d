#pragma once

#include <random>
#include <span>

#include "radarnet/actor.hpp"
#include "radarnet/allocation.hpp"
#include "radarnet/dense.hpp"

namespace radarnet::nn {

// Centralized value function over a fixed-size state summary.
struct CriticNet {
  DenseSpec spec;
  Vector params;

  static CriticNet make(int input_size, std::mt19937_64& rng, int hidden = 64);

  double forward(const Vector& summary) const;
  // Batched: one summary per row. Fills `cache` when given.
  Vector forward(const Matrix& summaries, DenseSpec::Cache* cache) const;
  // Adds dL/dparams for dL/dvalues (one per row of the cached batch).
  void backward(const DenseSpec::Cache& cache, const Vector& d_values, ParamSpan grad) const;

  nlohmann::json to_json() const;
  static CriticNet from_json(const nlohmann::json& j);
};

// Summary length for n radars and actor feature width f: n pooled feature
// blocks plus step, agents-done and budget-committed fractions.
int summary_size(int num_radars, int feature_width);

// Mean over target rows of the actor's extracted features. Not
// differentiated through: the critic treats it as input.
Vector pooled_features(const ActorNet& actor, const Matrix& rows);

Vector make_summary(std::span<const Vector> pooled, double step_fraction, double done_fraction,
                    double committed_fraction);

}  // namespace radarnet::nn
