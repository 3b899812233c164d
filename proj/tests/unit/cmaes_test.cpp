#include "radarnet/cmaes.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace radarnet::cmaes {
namespace {

double neg_sphere(const Vector& x) { return -x.squaredNorm(); }

TEST(Cmaes, DefaultLambda) {
  EXPECT_EQ(default_lambda(9), 4 + static_cast<int>(std::floor(3.0 * std::log(9.0))));
  EXPECT_EQ(default_lambda(1), 4);
}

TEST(Cmaes, SphereNineDimensionsAllSeeds) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Options o;
    o.dimension = 9;
    o.generations = 200;
    o.seed = seed;
    o.mean0 = Vector::Constant(9, 1.0);
    const Result r = optimize(neg_sphere, o);
    EXPECT_GT(r.best_fitness, -1e-8) << "seed " << seed;
  }
}

TEST(Cmaes, RotatedEllipsoid) {
  Options o;
  o.dimension = 5;
  o.generations = 400;
  o.seed = 3;
  o.mean0 = Vector::Constant(5, 2.0);
  const Result r = optimize(
      [](const Vector& x) {
        double f = 0.0;
        for (int i = 0; i < x.size(); ++i) {
          const double s = x.head(i + 1).sum();
          f += s * s * std::pow(10.0, i);
        }
        return -f;
      },
      o);
  EXPECT_GT(r.best_fitness, -1e-6);
}

TEST(Cmaes, BestEverIsMonotoneAndSameSeedRepeats) {
  Options o;
  o.dimension = 4;
  o.generations = 40;
  o.seed = 9;
  const Result a = optimize(neg_sphere, o);
  const Result b = optimize(neg_sphere, o);
  for (std::size_t g = 1; g < a.history.size(); ++g) {
    EXPECT_GE(a.history[g].best_ever, a.history[g - 1].best_ever);
  }
  EXPECT_EQ(a.best_x, b.best_x);
  EXPECT_EQ(a.history.size(), 40u);
}

TEST(Cmaes, JsonRestoreContinuesIdentically) {
  Options o;
  o.dimension = 3;
  o.seed = 5;
  Optimizer straight(o);
  Optimizer first(o);
  for (int g = 0; g < 5; ++g) {
    const auto xs = first.ask();
    std::vector<double> f;
    for (const auto& x : xs) f.push_back(neg_sphere(x));
    first.tell(f);
  }
  Optimizer resumed = Optimizer::from_json(nlohmann::json::parse(first.to_json().dump(1)));
  for (int g = 0; g < 10; ++g) {
    const auto xs = straight.ask();
    std::vector<double> f;
    for (const auto& x : xs) f.push_back(neg_sphere(x));
    straight.tell(f);
  }
  for (int g = 5; g < 10; ++g) {
    const auto xs = resumed.ask();
    std::vector<double> f;
    for (const auto& x : xs) f.push_back(neg_sphere(x));
    resumed.tell(f);
  }
  EXPECT_EQ(resumed.mean(), straight.mean());
  EXPECT_EQ(resumed.sigma(), straight.sigma());
}

TEST(Cmaes, RejectsBadUse) {
  Options o;
  o.dimension = 0;
  EXPECT_THROW(Optimizer{o}, std::invalid_argument);
  o.dimension = 2;
  Optimizer opt(o);
  EXPECT_THROW(opt.tell({1.0}), std::logic_error);
  opt.ask();
  EXPECT_THROW(opt.tell({1.0}), std::logic_error);
  std::vector<double> bad(opt.lambda(), 0.0);
  bad[0] = std::nan("");
  EXPECT_THROW(opt.tell(bad), std::runtime_error);
}

}  // namespace
}  // namespace radarnet::cmaes
