#include "sbnn/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sbnn/cma_es.hpp"
#include "sbnn/plasticity.hpp"
#include "sbnn/rng.hpp"

namespace sbnn {

namespace {

// Tags keeping seed derivations for unrelated purposes apart.
constexpr std::uint64_t kCmaStream = 0x11;
constexpr std::uint64_t kEpisodeStream = 0x22;
constexpr std::uint64_t kValidationStream = 0x33;
constexpr std::uint64_t kEnvSubstream = 0;
constexpr std::uint64_t kShuffleSubstream = 1;

double mean_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += v[i];
  return hi > lo ? sum / static_cast<double>(hi - lo) : 0.0;
}

NetworkTopology build_model(const ExperimentConfig& cfg, const EnvironmentSpec& spec) {
  return cfg.model == NetworkKind::Sbnn
             ? build_sbnn_topology(spec.observation_dim, cfg.hidden, spec.action_count)
             : build_ffnn_topology(spec.observation_dim, cfg.hidden, spec.action_count);
}

}  // namespace

const char* model_name(NetworkKind kind) {
  return kind == NetworkKind::Sbnn ? "sbnn" : "ffnn";
}

NetworkKind parse_model(const std::string& name) {
  if (name == "sbnn") return NetworkKind::Sbnn;
  if (name == "ffnn") return NetworkKind::Ffnn;
  throw std::invalid_argument("unknown model: " + name + " (expected sbnn or ffnn)");
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.task != "cartpole" && cfg.task != "mountaincar")
    throw std::invalid_argument("unknown task: " + cfg.task);
  if (cfg.hidden < 0) throw std::invalid_argument("hidden must be >= 0");
  if (!(cfg.prune_rate >= 0.0 && cfg.prune_rate <= 100.0))
    throw std::invalid_argument("prune-rate must be in [0, 100]");
  if (cfg.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (cfg.model == NetworkKind::Sbnn &&
      (cfg.prune_time < 1 || cfg.prune_time >= cfg.episodes))
    throw std::invalid_argument("prune-time must be in [1, episodes)");
  if (cfg.budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (cfg.budget_unit != "evaluations" && cfg.budget_unit != "episodes")
    throw std::invalid_argument("budget-unit must be evaluations or episodes");
  if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (cfg.threads < 0) throw std::invalid_argument("threads must be >= 0");
}

long long budget_evaluations(const ExperimentConfig& cfg) {
  if (cfg.budget_unit == "episodes")
    return std::max<long long>(1, cfg.budget / cfg.episodes);
  return cfg.budget;
}

EvaluationOutput evaluate_genome(const Eigen::VectorXd& genome,
                                 const ExperimentConfig& cfg,
                                 std::uint64_t stream_seed) {
  const auto start_time = std::chrono::steady_clock::now();
  auto env = make_environment(cfg.task);
  NetworkTopology net = build_model(cfg, env->spec());
  apply_genome(net, genome);
  const int total_connections = static_cast<int>(net.connections.size());

  Agent agent(std::move(net), HebbianConfig{cfg.eta, cfg.model == NetworkKind::Sbnn});
  PruneEvent prune;
  if (cfg.model == NetworkKind::Ffnn)
    prune = agent.prune_and_freeze(cfg.prune_rate, 0);

  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    const std::uint64_t ep_seed =
        derive_seed(stream_seed, {static_cast<std::uint64_t>(ep)});
    agent.start_episode(derive_seed(ep_seed, {kShuffleSubstream}));
    env->reset(derive_seed(ep_seed, {kEnvSubstream}));
    double total = 0.0;
    while (!env->terminated()) total += agent.step(*env).reward;
    rewards.push_back(total);
    if (cfg.model == NetworkKind::Sbnn && ep == cfg.prune_time)
      prune = agent.prune_and_freeze(cfg.prune_rate, ep);
  }

  RunRecord rec;
  rec.task = cfg.task;
  rec.model = cfg.model;
  rec.episode_rewards = std::move(rewards);
  if (cfg.model == NetworkKind::Sbnn) {
    const auto pt = static_cast<std::size_t>(cfg.prune_time);
    rec.pre_mean = mean_range(rec.episode_rewards, 0, pt);
    rec.post_mean = mean_range(rec.episode_rewards, pt, rec.episode_rewards.size());
    rec.fitness = 0.5 * (rec.pre_mean + rec.post_mean);
  } else {
    rec.pre_mean = std::numeric_limits<double>::quiet_NaN();
    rec.post_mean = mean_range(rec.episode_rewards, 0, rec.episode_rewards.size());
    rec.fitness = rec.post_mean;
  }
  rec.prune = prune;
  rec.working = static_cast<int>(working_connections(agent.network()).size());
  rec.total_connections = total_connections;
  rec.working_fraction =
      total_connections > 0
          ? static_cast<double>(rec.working) / static_cast<double>(total_connections)
          : 0.0;
  rec.structure = classify_structure(agent.network());
  rec.master_seed = cfg.seed;
  rec.stream_seed = stream_seed;
  rec.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
          .count();
  return {std::move(rec), agent.network(), agent.schedule()};
}

RunRecord evaluate_sbnn(const Eigen::VectorXd& genome, const ExperimentConfig& cfg,
                        std::uint64_t stream_seed) {
  if (cfg.model != NetworkKind::Sbnn)
    throw std::invalid_argument("evaluate_sbnn: config model is not sbnn");
  return evaluate_genome(genome, cfg, stream_seed).record;
}

RunRecord evaluate_ffnn(const Eigen::VectorXd& genome, const ExperimentConfig& cfg,
                        std::uint64_t stream_seed) {
  if (cfg.model != NetworkKind::Ffnn)
    throw std::invalid_argument("evaluate_ffnn: config model is not ffnn");
  return evaluate_genome(genome, cfg, stream_seed).record;
}

namespace {

void evaluate_batch(const std::vector<Eigen::VectorXd>& batch,
                    const ExperimentConfig& cfg, std::uint64_t stream_seed,
                    std::vector<double>& fitness) {
  int threads = cfg.threads == 0
                    ? static_cast<int>(std::thread::hardware_concurrency())
                    : cfg.threads;
  threads = std::clamp(threads, 1, static_cast<int>(batch.size()));

  if (threads == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i)
      fitness[i] = evaluate_genome(batch[i], cfg, stream_seed).record.fitness;
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < batch.size();
             i = next.fetch_add(1))
          fitness[i] = evaluate_genome(batch[i], cfg, stream_seed).record.fitness;
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

RunResult evolve_run(const ExperimentConfig& cfg, int run_index) {
  validate_config(cfg);
  auto env = make_environment(cfg.task);
  const int dim = genome_length(build_model(cfg, env->spec()));

  RunResult result;
  result.run_index = run_index;

  CmaState cma = cma_init(
      dim, derive_seed(cfg.seed, {kCmaStream, static_cast<std::uint64_t>(run_index)}));
  const long long budget = budget_evaluations(cfg);

  double best_fitness = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_genome;
  std::uint64_t best_stream = 0;

  while (cma.evals < budget) {
    // Every genome of a generation is scored on the same episode seeds, so
    // fitness differences come from the genomes, not from luckier episodes.
    const std::uint64_t stream_seed =
        derive_seed(cfg.seed, {kEpisodeStream, static_cast<std::uint64_t>(run_index),
                               static_cast<std::uint64_t>(cma.generation)});
    const std::vector<Eigen::VectorXd> batch = ask(cma);
    std::vector<double> fitness(batch.size(), 0.0);
    evaluate_batch(batch, cfg, stream_seed, fitness);
    tell(cma, batch, fitness);

    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (fitness[k] > best_fitness) {
        best_fitness = fitness[k];
        best_genome = batch[k];
        best_stream = stream_seed;
      }
    }

    std::vector<double> sorted(fitness);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = 0.5 * (sorted[(n - 1) / 2] + sorted[n / 2]);
    result.trace.push_back(
        {cma.generation - 1, cma.evals, sorted.back(), median, cma.sigma});
  }

  // Replay the winning evaluation to recover its full record and network;
  // it must reproduce the fitness bit for bit.
  EvaluationOutput out = evaluate_genome(best_genome, cfg, best_stream);
  if (out.record.fitness != best_fitness)
    throw std::runtime_error("winning evaluation did not replay identically");
  out.record.run_index = run_index;

  result.ok = true;
  result.best_fitness = best_fitness;
  result.best_genome = std::move(best_genome);
  result.best_record = std::move(out.record);
  result.best_network = std::move(out.network);
  result.best_schedule = std::move(out.schedule);
  result.evaluations = cma.evals;
  return result;
}

namespace {

std::string run_dir_name(int run_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03d", run_index);
  return buf;
}

std::string config_snapshot(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "task=" << cfg.task << "\n";
  s << "model=" << model_name(cfg.model) << "\n";
  s << "hidden=" << cfg.hidden << "\n";
  s << "prune-rate=" << format_double(cfg.prune_rate) << "\n";
  s << "prune-time=" << cfg.prune_time << "\n";
  s << "eta=" << format_double(cfg.eta) << "\n";
  s << "budget=" << cfg.budget << "\n";
  s << "budget-unit=" << cfg.budget_unit << "\n";
  s << "episodes=" << cfg.episodes << "\n";
  s << "runs=" << cfg.runs << "\n";
  s << "seed=" << cfg.seed << "\n";
  s << "threads=" << cfg.threads << "\n";
  return s.str();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream s;
  s << "generation,evals,best,median,sigma\n";
  for (const TraceRow& row : trace)
    s << row.generation << "," << row.evals << "," << format_double(row.best) << ","
      << format_double(row.median) << "," << format_double(row.sigma) << "\n";
  return s.str();
}

std::string prune_events_csv(const PruneEvent& e) {
  std::ostringstream s;
  s << "episode,rate,threshold,removed\n";
  s << e.episode << "," << format_double(e.rate) << ","
    << format_double(e.threshold) << "," << e.removed << "\n";
  return s.str();
}

void persist_run(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                 const RunResult& res) {
  const std::filesystem::path final_dir = out_dir / run_dir_name(res.run_index);
  const std::filesystem::path tmp_dir =
      out_dir / (run_dir_name(res.run_index) + ".tmp");
  std::filesystem::remove_all(tmp_dir);
  std::filesystem::create_directories(tmp_dir);

  atomic_write_text(tmp_dir / "config.txt", config_snapshot(cfg));
  if (res.ok) {
    atomic_write_text(tmp_dir / "trace.csv", trace_csv(res.trace));
    atomic_write_text(tmp_dir / "prune_events.csv",
                      prune_events_csv(res.best_record.prune));
    Json genome = Json::object();
    genome["genome"] = std::vector<double>(
        res.best_genome.data(), res.best_genome.data() + res.best_genome.size());
    save_json(tmp_dir / "best_genome.json", genome);
    save_json(tmp_dir / "best_network.json",
              network_to_json(res.best_network, &res.best_schedule));
    save_json(tmp_dir / "run_record.json", run_record_to_json(res.best_record));
  } else {
    atomic_write_text(tmp_dir / "error.txt", res.error + "\n");
  }

  std::filesystem::remove_all(final_dir);
  std::filesystem::rename(tmp_dir, final_dir);
}

void write_manifest(const std::filesystem::path& out_dir,
                    const std::vector<RunResult>& runs) {
  std::ostringstream s;
  s << "run,status,fitness,pre_mean,post_mean,working_fraction,structure,"
       "evaluations,dir,error\n";
  for (const RunResult& r : runs) {
    s << r.run_index << ",";
    if (r.ok) {
      s << "ok," << format_double(r.best_fitness) << ","
        << format_double(r.best_record.pre_mean) << ","
        << format_double(r.best_record.post_mean) << ","
        << format_double(r.best_record.working_fraction) << ","
        << structure_name(r.best_record.structure.cls) << "," << r.evaluations
        << "," << run_dir_name(r.run_index) << ",";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      s << "failed,,,,,,," << run_dir_name(r.run_index) << "," << msg;
    }
    s << "\n";
  }
  atomic_write_text(out_dir / "manifest.csv", s.str());
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const bool persist = !cfg.out_dir.empty();
  const std::filesystem::path out_dir = cfg.out_dir;
  if (persist) std::filesystem::create_directories(out_dir);

  ExperimentSummary summary;
  for (int r = 0; r < cfg.runs; ++r) {
    RunResult res;
    res.run_index = r;
    try {
      res = evolve_run(cfg, r);
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    if (persist) {
      persist_run(out_dir, cfg, res);
    }
    summary.runs.push_back(std::move(res));
    if (persist) write_manifest(out_dir, summary.runs);
  }
  return summary;
}

ValidationResult validate_transfer(const std::filesystem::path& network_file,
                                   const std::string& target_task,
                                   const RemapSpec& remap, int episodes,
                                   std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  LoadedNetwork loaded = network_from_json(load_json(network_file));
  const int net_inputs = loaded.net.inputs;
  const int net_outputs = loaded.net.outputs;

  auto env = wrap_remapped(make_environment(target_task), remap, net_inputs,
                           net_outputs);

  Agent agent(std::move(loaded.net), HebbianConfig{0.0, false});
  if (loaded.has_schedule)
    agent.freeze_with_schedule(std::move(loaded.schedule));
  else
    agent.freeze();

  ValidationResult result;
  for (int ep = 1; ep <= episodes; ++ep) {
    const std::uint64_t ep_seed =
        derive_seed(seed, {kValidationStream, static_cast<std::uint64_t>(ep)});
    agent.start_episode(derive_seed(ep_seed, {kShuffleSubstream}));
    env->reset(derive_seed(ep_seed, {kEnvSubstream}));
    double total = 0.0;
    while (!env->terminated()) total += agent.step(*env).reward;
    result.episode_rewards.push_back(total);
  }
  result.mean_reward =
      mean_range(result.episode_rewards, 0, result.episode_rewards.size());
  return result;
}

std::vector<ParameterCountRow> parameter_count_table(int max_hidden) {
  if (max_hidden < 1) throw std::invalid_argument("max_hidden must be >= 1");
  std::vector<ParameterCountRow> rows;
  rows.reserve(static_cast<std::size_t>(max_hidden));
  for (int h = 1; h <= max_hidden; ++h) {
    const long long ffnn = ffnn_connection_count(1, h, 1);
    const long long sbnn = sbnn_connection_count(1, h, 1);
    rows.push_back({h, ffnn, 4 * ffnn, 4 * sbnn});
  }
  return rows;
}

namespace {

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> record_files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_directory()) continue;
      if (entry.path().filename().string().rfind("run_", 0) != 0) continue;
      const std::filesystem::path record = entry.path() / "run_record.json";
      if (std::filesystem::exists(record)) record_files.push_back(record);
    }
  }
  std::sort(record_files.begin(), record_files.end());
  if (record_files.empty())
    throw std::runtime_error("no run records found under " + dir.string());

  std::vector<double> fitness;
  std::vector<double> working_fraction;
  std::map<std::pair<std::string, int>, int> structures;
  for (const auto& file : record_files) {
    const RunRecord rec = run_record_from_json(load_json(file));
    fitness.push_back(rec.fitness);
    working_fraction.push_back(rec.working_fraction);
    ++structures[{structure_name(rec.structure.cls), rec.structure.depth}];
  }
  std::sort(fitness.begin(), fitness.end());

  std::vector<std::filesystem::path> written;

  {
    std::ostringstream s;
    s << "stat,value\n";
    s << "count," << fitness.size() << "\n";
    s << "mean," << format_double(mean_range(fitness, 0, fitness.size())) << "\n";
    s << "min," << format_double(fitness.front()) << "\n";
    s << "q1," << format_double(quantile(fitness, 0.25)) << "\n";
    s << "median," << format_double(quantile(fitness, 0.5)) << "\n";
    s << "q3," << format_double(quantile(fitness, 0.75)) << "\n";
    s << "max," << format_double(fitness.back()) << "\n";
    const std::filesystem::path p = dir / "report_fitness.csv";
    atomic_write_text(p, s.str());
    written.push_back(p);
  }

  {
    // Fraction of runs per 10-point band of working connections; a run at
    // exactly a band edge counts in the lower band, 0% in the first.
    std::array<int, 10> bins{};
    for (double f : working_fraction) {
      const double pct = 100.0 * f;
      int idx = static_cast<int>(std::ceil(pct / 10.0)) - 1;
      idx = std::clamp(idx, 0, 9);
      ++bins[static_cast<std::size_t>(idx)];
    }
    std::ostringstream s;
    s << "bin_low_percent,bin_high_percent,runs,fraction\n";
    for (int b = 0; b < 10; ++b) {
      s << b * 10 << "," << (b + 1) * 10 << "," << bins[static_cast<std::size_t>(b)]
        << ","
        << format_double(static_cast<double>(bins[static_cast<std::size_t>(b)]) /
                         static_cast<double>(working_fraction.size()))
        << "\n";
    }
    const std::filesystem::path p = dir / "report_working_connections.csv";
    atomic_write_text(p, s.str());
    written.push_back(p);
  }

  {
    std::ostringstream s;
    s << "structure,depth,count\n";
    for (const auto& [key, count] : structures)
      s << key.first << "," << key.second << "," << count << "\n";
    const std::filesystem::path p = dir / "report_structures.csv";
    atomic_write_text(p, s.str());
    written.push_back(p);
  }

  {
    std::ostringstream s;
    s << "hidden,ffnn_weights,ffnn_abcd,sbnn_abcd\n";
    for (const ParameterCountRow& row : parameter_count_table(50))
      s << row.hidden << "," << row.ffnn_weights << "," << row.ffnn_abcd << ","
        << row.sbnn_abcd << "\n";
    const std::filesystem::path p = dir / "report_parameter_counts.csv";
    atomic_write_text(p, s.str());
    written.push_back(p);
  }

  return written;
}

namespace {

Json double_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double json_to_double(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

StructureClass parse_structure(const std::string& name) {
  if (name == "zero_layer") return StructureClass::ZeroLayer;
  if (name == "single_layer") return StructureClass::SingleLayer;
  if (name == "multi_layer") return StructureClass::MultiLayer;
  if (name == "mixed") return StructureClass::Mixed;
  throw std::invalid_argument("unknown structure class: " + name);
}

}  // namespace

Json run_record_to_json(const RunRecord& r) {
  Json j;
  j["task"] = r.task;
  j["model"] = model_name(r.model);
  j["fitness"] = r.fitness;
  j["pre_mean"] = double_or_null(r.pre_mean);
  j["post_mean"] = double_or_null(r.post_mean);
  j["episode_rewards"] = r.episode_rewards;
  j["prune"] = Json{{"episode", r.prune.episode},
                    {"rate", r.prune.rate},
                    {"threshold", r.prune.threshold},
                    {"removed", r.prune.removed}};
  j["working"] = Json{{"count", r.working},
                      {"total", r.total_connections},
                      {"fraction", r.working_fraction}};
  j["structure"] = Json{{"class", structure_name(r.structure.cls)},
                        {"depth", r.structure.depth}};
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["seeds"] = Json{{"master", r.master_seed},
                    {"run", r.run_index},
                    {"stream", r.stream_seed}};
  return j;
}

RunRecord run_record_from_json(const Json& j) {
  RunRecord r;
  r.task = j.at("task").get<std::string>();
  r.model = parse_model(j.at("model").get<std::string>());
  r.fitness = j.at("fitness").get<double>();
  r.pre_mean = json_to_double(j.at("pre_mean"));
  r.post_mean = json_to_double(j.at("post_mean"));
  r.episode_rewards = j.at("episode_rewards").get<std::vector<double>>();
  const Json& p = j.at("prune");
  r.prune = {p.at("episode").get<int>(), p.at("rate").get<double>(),
             p.at("threshold").get<double>(), p.at("removed").get<int>()};
  const Json& w = j.at("working");
  r.working = w.at("count").get<int>();
  r.total_connections = w.at("total").get<int>();
  r.working_fraction = w.at("fraction").get<double>();
  const Json& st = j.at("structure");
  r.structure = {parse_structure(st.at("class").get<std::string>()),
                 st.at("depth").get<int>()};
  r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
  const Json& seeds = j.at("seeds");
  r.master_seed = seeds.at("master").get<std::uint64_t>();
  r.run_index = seeds.at("run").get<int>();
  r.stream_seed = seeds.at("stream").get<std::uint64_t>();
  return r;
}

}  // namespace sbnn
