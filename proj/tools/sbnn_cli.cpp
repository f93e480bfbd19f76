#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sbnn/activation.hpp"
#include "sbnn/environment.hpp"
#include "sbnn/harness.hpp"
#include "sbnn/rng.hpp"
#include "sbnn/serialization.hpp"

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::runtime_error("empty entry in list: " + text);
    out.push_back(std::stoi(item));
  }
  return out;
}

// Remap files are flat key=value, '#' starts a comment:
//   input_map = 0, 2, 4, 5
//   output_map = 1, 3
sbnn::RemapSpec load_remap(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open remap config: " + path);
  sbnn::RemapSpec remap;
  bool saw_inputs = false, saw_outputs = false;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("remap config line is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "input_map") {
      remap.input_map = parse_int_list(value);
      saw_inputs = true;
    } else if (key == "output_map") {
      remap.output_map = parse_int_list(value);
      saw_outputs = true;
    } else {
      throw std::runtime_error("unknown remap config key: " + key);
    }
  }
  if (!saw_inputs || !saw_outputs)
    throw std::runtime_error("remap config needs input_map and output_map");
  return remap;
}

int cmd_evolve(const sbnn::ExperimentConfig& cfg) {
  const sbnn::ExperimentSummary summary = sbnn::run_experiment(cfg);
  double best = -std::numeric_limits<double>::infinity();
  int failures = 0;
  for (const sbnn::RunResult& r : summary.runs) {
    if (!r.ok) {
      ++failures;
      std::cout << "run " << r.run_index << ": failed: " << r.error << "\n";
      continue;
    }
    best = std::max(best, r.best_fitness);
    std::cout << "run " << r.run_index << ": fitness "
              << sbnn::format_double(r.best_fitness) << ", working "
              << r.best_record.working << "/" << r.best_record.total_connections
              << ", structure "
              << sbnn::structure_name(r.best_record.structure.cls) << " (depth "
              << r.best_record.structure.depth << "), evaluations "
              << r.evaluations << "\n";
  }
  if (failures < static_cast<int>(summary.runs.size()))
    std::cout << "best fitness " << sbnn::format_double(best) << "\n";
  if (!cfg.out_dir.empty()) std::cout << "artifacts in " << cfg.out_dir << "\n";
  return failures == static_cast<int>(summary.runs.size()) ? 1 : 0;
}

int cmd_validate(const std::string& network_file, const std::string& target,
                 const std::string& remap_file, int episodes, std::uint64_t seed) {
  sbnn::RemapSpec remap;
  if (remap_file.empty())
    remap = sbnn::identity_remap(sbnn::make_environment(target)->spec());
  else
    remap = load_remap(remap_file);

  const sbnn::ValidationResult result =
      sbnn::validate_transfer(network_file, target, remap, episodes, seed);
  const double threshold = sbnn::make_environment(target)->spec().solve_threshold;
  int solved = 0;
  for (double r : result.episode_rewards)
    if (r >= threshold) ++solved;
  std::cout << "episodes " << episodes << ", mean reward "
            << sbnn::format_double(result.mean_reward) << ", solved " << solved
            << "/" << episodes << " (threshold "
            << sbnn::format_double(threshold) << ")\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  for (const auto& path : sbnn::write_reports(dir))
    std::cout << path.string() << "\n";
  return 0;
}

int cmd_trace(const std::string& network_file, const std::string& task,
              const std::string& remap_file, int episodes, std::uint64_t seed) {
  sbnn::LoadedNetwork loaded =
      sbnn::network_from_json(sbnn::load_json(network_file));
  const int net_inputs = loaded.net.inputs;
  const int net_outputs = loaded.net.outputs;

  sbnn::RemapSpec remap;
  if (remap_file.empty())
    remap = sbnn::identity_remap(sbnn::make_environment(task)->spec());
  else
    remap = load_remap(remap_file);
  auto env = sbnn::wrap_remapped(sbnn::make_environment(task), remap, net_inputs,
                                 net_outputs);

  sbnn::Agent agent(std::move(loaded.net), sbnn::HebbianConfig{0.0, false});
  if (loaded.has_schedule)
    agent.freeze_with_schedule(std::move(loaded.schedule));
  else
    agent.freeze();

  std::cout << "t";
  for (int i = 0; i < env->spec().observation_dim; ++i) std::cout << ",obs_" << i;
  std::cout << ",action,reward\n";

  for (int ep = 1; ep <= episodes; ++ep) {
    const std::uint64_t ep_seed =
        sbnn::derive_seed(seed, {static_cast<std::uint64_t>(ep)});
    agent.start_episode(sbnn::derive_seed(ep_seed, {1}));
    env->reset(sbnn::derive_seed(ep_seed, {0}));
    int t = 0;
    while (!env->terminated()) {
      const Eigen::VectorXd obs = env->observation();
      const sbnn::StepRecord rec = agent.step(*env);
      std::cout << t;
      for (Eigen::Index i = 0; i < obs.size(); ++i)
        std::cout << "," << sbnn::format_double(obs[i]);
      std::cout << "," << rec.action << "," << sbnn::format_double(rec.reward)
                << "\n";
      ++t;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-building neural networks: evolve, validate, inspect"};
  app.require_subcommand(1);

  sbnn::ExperimentConfig cfg;
  std::string model = "sbnn";
  CLI::App* evolve = app.add_subcommand(
      "evolve", "Evolve Hebbian rules (sbnn) or weights (ffnn) with CMA-ES");
  evolve->add_option("--task", cfg.task, "cartpole or mountaincar")
      ->capture_default_str();
  evolve->add_option("--model", model, "sbnn or ffnn")->capture_default_str();
  evolve->add_option("--hidden", cfg.hidden, "hidden node count")
      ->capture_default_str();
  evolve->add_option("--prune-rate", cfg.prune_rate,
                     "percent of connections removed by the one-shot prune")
      ->capture_default_str();
  evolve->add_option("--prune-time", cfg.prune_time,
                     "episode after which the sbnn prunes (ignored for ffnn)")
      ->capture_default_str();
  evolve->add_option("--eta", cfg.eta, "Hebbian learning rate")
      ->capture_default_str();
  evolve->add_option("--budget", cfg.budget, "optimizer budget per run")
      ->capture_default_str();
  evolve->add_option("--budget-unit", cfg.budget_unit,
                     "what --budget counts: evaluations or episodes")
      ->capture_default_str();
  evolve->add_option("--episodes", cfg.episodes, "episodes per fitness evaluation")
      ->capture_default_str();
  evolve->add_option("--runs", cfg.runs, "independent evolution runs")
      ->capture_default_str();
  evolve->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  evolve->add_option("--out", cfg.out_dir, "output directory for run artifacts");
  evolve->add_option("--threads", cfg.threads,
                     "evaluation threads per generation (0 = all cores)")
      ->capture_default_str();
  evolve->set_config("--config", "",
                     "key=value file with the options above; command line wins");

  std::string network_file, target, remap_file, report_dir, trace_task;
  int val_episodes = 100;
  std::uint64_t val_seed = 0;
  CLI::App* validate = app.add_subcommand(
      "validate", "Evaluate a saved frozen network on a (remapped) task");
  validate->add_option("--network", network_file, "network JSON file")->required();
  validate->add_option("--target", target, "target task")->required();
  validate->add_option("--remap-config", remap_file,
                       "key=value file with input_map/output_map");
  validate->add_option("--episodes", val_episodes)->capture_default_str();
  validate->add_option("--seed", val_seed)->capture_default_str();

  CLI::App* report = app.add_subcommand(
      "report", "Aggregate run records in a directory into CSV reports");
  report->add_option("--dir", report_dir, "directory with run_* subdirectories")
      ->required();

  std::string trace_network, trace_remap;
  int trace_episodes = 1;
  std::uint64_t trace_seed = 0;
  CLI::App* trace = app.add_subcommand(
      "trace", "Step a saved network and print t, observation..., action, reward");
  trace->add_option("--network", trace_network, "network JSON file")->required();
  trace->add_option("--task", trace_task, "task to run")->required();
  trace->add_option("--remap-config", trace_remap,
                    "key=value file with input_map/output_map");
  trace->add_option("--episodes", trace_episodes)->capture_default_str();
  trace->add_option("--seed", trace_seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) {
      cfg.model = sbnn::parse_model(model);
      return cmd_evolve(cfg);
    }
    if (validate->parsed())
      return cmd_validate(network_file, target, remap_file, val_episodes, val_seed);
    if (report->parsed()) return cmd_report(report_dir);
    if (trace->parsed())
      return cmd_trace(trace_network, trace_task, trace_remap, trace_episodes,
                       trace_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
