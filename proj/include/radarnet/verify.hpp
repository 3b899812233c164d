#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "radarnet/geometry.hpp"
#include "radarnet/seqdec.hpp"

namespace radarnet::verify {

enum class Level { kQuick, kFull };
Level parse_level(const std::string& name);  // throws ConfigError

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  double seconds = 0.0;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::string to_text() const;
};

using InvertFn = std::function<seqdec::SeqPolicyTable(const seqdec::PolicyTable&)>;

struct Options {
  Level level = Level::kQuick;
  std::uint64_t seed = 1;
  // Swappable so a deliberately broken inverse can be shown to fail.
  InvertFn invert = seqdec::invert;
};

CheckResult check_surjectivity(const Options& o);
CheckResult check_worked_inverse(const Options& o);
CheckResult check_value_equivalence(const Options& o);
CheckResult check_optimality(const Options& o);
CheckResult check_gradients(const Options& o);
CheckResult check_geometry(const Options& o);

Report run(const Options& o);

// Uniform rejection estimate over the common bounding box of the ellipses.
double monte_carlo_area(const std::vector<geometry::Ellipse>& ellipses, int samples,
                        std::mt19937_64& rng);
// Overlapping-prone random ellipse: center in [-1.5, 1.5]^2, semi-axes in
// [0.4, 2], uniform orientation, scale_k 1.
geometry::Ellipse random_ellipse(std::mt19937_64& rng);

}  // namespace radarnet::verify
