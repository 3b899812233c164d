#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "radarnet/actor.hpp"
#include "radarnet/csv.hpp"
#include "radarnet/esto.hpp"
#include "radarnet/json_io.hpp"
#include "radarnet/parallel.hpp"
#include "radarnet/policy.hpp"
#include "radarnet/ppo.hpp"

#ifndef RADARNET_SCENARIO_DIR
#define RADARNET_SCENARIO_DIR "scenarios"
#endif

namespace radarnet::cli {
namespace {

using nlohmann::json;

const std::string kDefaultScenario = std::string(RADARNET_SCENARIO_DIR) + "/training.json";

int resolve_threads(int requested) { return requested > 0 ? requested : default_thread_count(); }

void write_rows(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ostringstream s;
  write_results(s, rows);
  write_text_file(path, s.str());
}

std::vector<ResultRow> to_rows(const std::string& scenario, const std::string& policy,
                               const SeedRun& run) {
  std::vector<ResultRow> rows;
  rows.reserve(run.utility.size());
  for (std::size_t k = 0; k < run.utility.size(); ++k) {
    rows.push_back({scenario, policy, run.seed, static_cast<int>(k), run.utility[k]});
  }
  return rows;
}

std::string history_path_for(const std::string& out) {
  const std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_history.csv")).string();
}

json stats_json(const Stats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"se", s.se}};
}

}  // namespace

PolicySpec parse_policy_spec(const std::string& text) {
  PolicySpec spec;
  spec.label = text;
  const auto colon = text.find(':');
  spec.kind = text.substr(0, colon);
  if (colon != std::string::npos) spec.path = text.substr(colon + 1);
  if (spec.kind == "baseline") {
    if (!spec.path.empty()) throw ConfigError("policy", "baseline takes no file");
  } else if (spec.kind == "esto" || spec.kind == "rl") {
    if (spec.path.empty()) throw ConfigError("policy", spec.kind + " needs <kind>:<file>");
  } else {
    throw ConfigError("policy", "unknown policy '" + text + "' (baseline | esto:F | rl:F)");
  }
  return spec;
}

PolicyFactory make_policy_factory(const PolicySpec& spec) {
  if (spec.kind == "baseline") {
    return [](std::uint64_t) { return std::make_unique<GreedyPolicy>(); };
  }
  if (spec.kind == "esto") {
    const esto::PreferenceModel model = esto::load_weights(spec.path);
    return [model](std::uint64_t) { return std::make_unique<esto::EstoPolicy>(model); };
  }
  if (spec.kind == "rl") {
    const nn::ActorNet actor = nn::load_checkpoint(spec.path).actor;
    return [actor](std::uint64_t seed) {
      return std::make_unique<nn::ActorPolicy>(actor, nn::ActorPolicy::Mode::kSample, seed);
    };
  }
  throw ConfigError("policy", "unknown policy kind '" + spec.kind + "'");
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    if (text.find(',') == std::string::npos) {
      const long long n = std::stoll(text);
      if (n < 1) throw ConfigError("seeds", "seed count must be at least 1");
      for (long long s = 1; s <= n; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
      return seeds;
    }
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item.empty()) throw ConfigError("seeds", "empty entry in '" + text + "'");
      seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("seeds", "expected a count or a comma list, got '" + text + "'");
  }
  return seeds;
}

std::shared_ptr<const Scenario> load_scenario(const std::string& path,
                                              const std::vector<std::string>& overrides) {
  if (overrides.empty()) return std::make_shared<const Scenario>(load_scenario_file(path));
  json j = read_json_file(path, "scenario");
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("set", "override '" + o + "' is not key=value");
    }
    json::json_pointer ptr;
    std::stringstream keys(o.substr(0, eq));
    std::string key;
    while (std::getline(keys, key, '.')) ptr /= key;
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    j[ptr] = value.is_discarded() ? json(raw) : value;
  }
  try {
    return std::make_shared<const Scenario>(scenario_from_json(j));
  } catch (const json::exception& e) {
    throw ConfigError("scenario", e.what());
  }
}

EvalOutput run_eval(const std::shared_ptr<const Scenario>& scenario,
                    const std::vector<PolicySpec>& policies,
                    const std::vector<std::uint64_t>& seeds, int steps, int threads,
                    const std::string& out_dir) {
  if (policies.empty()) throw ConfigError("policies", "no policy given");
  if (seeds.empty()) throw ConfigError("seeds", "no seed given");
  if (steps < 1) throw ConfigError("steps", "must be at least 1");
  std::vector<PolicyFactory> factories;
  for (const PolicySpec& p : policies) factories.push_back(make_policy_factory(p));

  EvalOutput out;
  std::vector<ResultRow> rows;
  std::ostringstream aggregate;
  aggregate << "policy,step,mean,std\n";
  json summary = {{"scenario", scenario->name}, {"steps", steps}, {"seeds", seeds}};
  for (std::size_t p = 0; p < policies.size(); ++p) {
    out.policies.push_back(policies[p].label);
    out.runs.push_back(evaluate(scenario, factories[p], seeds, steps, threads));
    const auto& runs = out.runs.back();
    for (const SeedRun& r : runs) {
      const auto seed_rows = to_rows(scenario->name, policies[p].label, r);
      rows.insert(rows.end(), seed_rows.begin(), seed_rows.end());
    }
    for (int k = 0; k < steps; ++k) {
      std::vector<double> at_step;
      for (const SeedRun& r : runs) at_step.push_back(r.utility[k]);
      const Stats s = describe(at_step);
      aggregate << policies[p].label << ',' << k << ',' << format_double(s.mean) << ','
                << format_double(s.std) << '\n';
    }
    json entry = {{"policy", policies[p].label}, {"episode_mean", stats_json(describe(episode_means(runs)))}};
    if (p > 0) {
      entry["difference_vs_" + policies[0].label] =
          stats_json(paired_difference(runs, out.runs.front()));
    }
    summary["policies"].push_back(entry);
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_rows((dir / "results.csv").string(), rows);
  write_text_file((dir / "aggregate.csv").string(), aggregate.str());
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return out;
}

int run_verify(verify::Options options, std::ostream& out) {
  const verify::Report report = verify::run(options);
  out << report.to_text();
  return report.passed() ? kExitOk : kExitVerify;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized multi-radar target allocation workbench"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads; 0 reads RADARNET_THREADS")
      ->capture_default_str();

  std::string scenario_path = kDefaultScenario;
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->capture_default_str();
    sub->add_option("--set", overrides, "Scenario override key=value (repeatable)");
  };

  // simulate
  CLI::App* sim = app.add_subcommand("simulate", "Run one episode and write per-step utility");
  add_scenario(sim);
  std::string sim_policy = "baseline";
  std::uint64_t sim_seed = 1;
  int sim_steps = 300;
  std::string sim_out = "simulate.csv";
  sim->add_option("--policy", sim_policy, "baseline | esto:F | rl:F")->capture_default_str();
  sim->add_option("--seed", sim_seed, "World seed")->capture_default_str();
  sim->add_option("--steps", sim_steps, "Steps")->capture_default_str();
  sim->add_option("--out", sim_out, "Output CSV")->capture_default_str();

  // eval
  CLI::App* ev = app.add_subcommand("eval", "Compare policies over many seeds");
  add_scenario(ev);
  std::string ev_policies = "baseline";
  std::string ev_seeds = "16";
  int ev_steps = 300;
  std::string ev_out = "eval_out";
  ev->add_option("--policies", ev_policies, "Comma-separated policy specs")->capture_default_str();
  ev->add_option("--seeds", ev_seeds, "Seed count N (seeds 1..N) or comma list")
      ->capture_default_str();
  ev->add_option("--steps", ev_steps, "Steps per episode")->capture_default_str();
  ev->add_option("--out", ev_out, "Output directory")->capture_default_str();

  // train-esto
  CLI::App* te = app.add_subcommand("train-esto", "Optimize ESTO weights with CMA-ES");
  add_scenario(te);
  std::string te_variant = "esto";
  esto::TrainingConfig te_cfg;
  std::string te_out;
  std::string te_checkpoint;
  te->add_option("--variant", te_variant, "esto | esto-m")->capture_default_str();
  te->add_option("--generations", te_cfg.generations, "CMA-ES generations")->capture_default_str();
  te->add_option("--runs", te_cfg.runs, "Episodes per fitness evaluation")->capture_default_str();
  te->add_option("--seed", te_cfg.seed, "Optimizer seed")->capture_default_str();
  te->add_option("--sigma0", te_cfg.sigma0, "Initial step size")->capture_default_str();
  te->add_option("--steps", te_cfg.steps, "Steps per episode; 0 uses the scenario length")
      ->capture_default_str();
  te->add_option("--out", te_out, "Weights file (default <variant>_weights.json)");
  te->add_option("--checkpoint", te_checkpoint, "Checkpoint (default <out stem>.checkpoint.json)");

  // train-rl
  CLI::App* tr = app.add_subcommand("train-rl", "Train the sequential actor-critic with PPO");
  add_scenario(tr);
  nn::PpoConfig tr_cfg;
  std::string tr_out = "rl_checkpoint.json";
  tr->add_option("--iterations", tr_cfg.iterations, "PPO iterations")->capture_default_str();
  tr->add_option("--episodes", tr_cfg.episodes, "Episodes per iteration")->capture_default_str();
  tr->add_option("--steps", tr_cfg.steps, "Steps per episode; 0 uses the scenario length")
      ->capture_default_str();
  tr->add_option("--lr", tr_cfg.lr, "Adam learning rate")->capture_default_str();
  tr->add_option("--seed", tr_cfg.seed, "Training seed")->capture_default_str();
  std::string tr_scope = nn::discount_scope_name(tr_cfg.discount_scope);
  tr->add_option("--discount-scope", tr_scope, "Discount per macro-step or per micro-step")
      ->check(CLI::IsMember({"macro", "micro"}))
      ->capture_default_str();
  tr->add_option("--out", tr_out, "Checkpoint; resumed when compatible")->capture_default_str();

  // verify
  CLI::App* vf = app.add_subcommand("verify", "Run the executable property suites");
  std::string vf_level = "quick";
  std::uint64_t vf_seed = 1;
  vf->add_option("--level", vf_level, "quick | full")->capture_default_str();
  vf->add_option("--seed", vf_seed, "Suite seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const int workers = resolve_threads(threads);
    if (*sim) {
      if (sim_steps < 1) throw ConfigError("steps", "must be at least 1");
      const auto scenario = load_scenario(scenario_path, overrides);
      const PolicySpec spec = parse_policy_spec(sim_policy);
      const std::vector<std::uint64_t> seeds = {sim_seed};
      const auto runs = evaluate(scenario, make_policy_factory(spec), seeds, sim_steps, 1);
      write_rows(sim_out, to_rows(scenario->name, spec.label, runs.front()));
      out << "mean utility " << format_double(runs.front().mean) << " -> " << sim_out << '\n';
    } else if (*ev) {
      std::vector<PolicySpec> specs;
      std::stringstream list(ev_policies);
      std::string item;
      while (std::getline(list, item, ',')) specs.push_back(parse_policy_spec(item));
      const EvalOutput res = run_eval(load_scenario(scenario_path, overrides), specs,
                                      parse_seeds(ev_seeds), ev_steps, workers, ev_out);
      for (std::size_t p = 0; p < res.policies.size(); ++p) {
        const Stats s = describe(episode_means(res.runs[p]));
        out << res.policies[p] << " mean " << format_double(s.mean) << " se "
            << format_double(s.se) << '\n';
      }
      out << "results in " << ev_out << '\n';
    } else if (*te) {
      te_cfg.variant = esto::parse_variant(te_variant);
      te_cfg.scenario = load_scenario(scenario_path, overrides);
      te_cfg.threads = workers;
      if (te_out.empty()) te_out = te_variant + "_weights.json";
      if (te_checkpoint.empty()) {
        const std::filesystem::path p(te_out);
        te_checkpoint = (p.parent_path() / (p.stem().string() + ".checkpoint.json")).string();
      }
      const esto::TrainingResult res =
          esto::train(te_cfg, te_checkpoint, [&](const cmaes::GenerationRecord& g) {
            out << "generation " << g.generation << " best " << format_double(g.best)
                << " best_ever " << format_double(g.best_ever) << '\n';
          });
      Table history{{"generation", "best", "mean", "best_ever", "sigma"}, {}};
      for (const auto& g : res.history) {
        history.rows.push_back({static_cast<double>(g.generation), g.best, g.mean, g.best_ever,
                                g.sigma});
      }
      std::ostringstream h;
      write_table(h, history);
      write_text_file(history_path_for(te_out), h.str());
      esto::save_weights(res.model, te_cfg.scenario->hash(), te_cfg.generations, te_out);
      for (const std::string& e : res.events) out << "event: " << e << '\n';
      out << "best fitness " << format_double(res.best_fitness) << " -> " << te_out << '\n';
    } else if (*tr) {
      tr_cfg.threads = workers;
      tr_cfg.discount_scope = nn::parse_discount_scope(tr_scope);
      const auto scenario = load_scenario(scenario_path, overrides);
      const nn::PpoState st =
          nn::train(tr_cfg, scenario, tr_out, [&](const nn::IterationRecord& r) {
            out << "iteration " << r.iteration << " mean_utility "
                << format_double(r.mean_utility) << (r.aborted ? " (update aborted)" : "") << '\n';
          });
      Table history{{"iteration", "mean_utility", "policy_loss", "value_loss", "entropy",
                     "approx_kl", "clip_fraction", "samples", "aborted"},
                    {}};
      for (const auto& r : st.history) {
        history.rows.push_back({static_cast<double>(r.iteration), r.mean_utility, r.policy_loss,
                                r.value_loss, r.entropy, r.approx_kl, r.clip_fraction,
                                static_cast<double>(r.samples), r.aborted ? 1.0 : 0.0});
      }
      std::ostringstream h;
      write_table(h, history);
      write_text_file(history_path_for(tr_out), h.str());
      for (const std::string& e : st.events) out << "event: " << e << '\n';
      out << "checkpoint " << tr_out << '\n';
    } else if (*vf) {
      verify::Options o;
      o.level = verify::parse_level(vf_level);
      o.seed = vf_seed;
      return run_verify(o, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace radarnet::cli
