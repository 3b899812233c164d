#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "radarnet/evaluation.hpp"
#include "radarnet/verify.hpp"

namespace radarnet::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitVerify = 3,
  kExitRuntime = 4,
};

// baseline | esto:<weights.json> | rl:<checkpoint.json>
struct PolicySpec {
  std::string kind;
  std::string path;
  std::string label;  // as written on the command line
};

PolicySpec parse_policy_spec(const std::string& text);
// Loads the referenced file once; throws ConfigError if it is missing.
PolicyFactory make_policy_factory(const PolicySpec& spec);

// "N" means seeds 1..N; "a,b,c" lists them.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

// Scenario file with `key=value` overrides applied to its JSON form. Values
// parse as JSON when they can, otherwise as strings; dotted keys descend.
std::shared_ptr<const Scenario> load_scenario(const std::string& path,
                                              const std::vector<std::string>& overrides);

struct EvalOutput {
  std::vector<std::string> policies;
  std::vector<std::vector<SeedRun>> runs;  // [policy][seed]
};

// Writes results.csv, aggregate.csv and summary.json into out_dir.
EvalOutput run_eval(const std::shared_ptr<const Scenario>& scenario,
                    const std::vector<PolicySpec>& policies,
                    const std::vector<std::uint64_t>& seeds, int steps, int threads,
                    const std::string& out_dir);

int run_verify(verify::Options options, std::ostream& out);

// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radarnet::cli
