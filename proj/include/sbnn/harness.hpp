#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sbnn/activation.hpp"
#include "sbnn/environment.hpp"
#include "sbnn/network.hpp"
#include "sbnn/pruning.hpp"
#include "sbnn/serialization.hpp"

namespace sbnn {

const char* model_name(NetworkKind kind);           // "sbnn" / "ffnn"
NetworkKind parse_model(const std::string& name);

struct ExperimentConfig {
  std::string task = "cartpole";
  NetworkKind model = NetworkKind::Sbnn;
  int hidden = 3;
  double prune_rate = 40.0;   // percent of all connections
  int prune_time = 5;         // sbnn: prune after this episode (1-based)
  double eta = 0.1;
  long long budget = 2000;
  std::string budget_unit = "evaluations";  // or "episodes"
  int episodes = 100;         // episodes per fitness evaluation
  int runs = 1;
  std::uint64_t seed = 0;
  std::string out_dir;        // empty: keep results in memory only
  int threads = 1;            // 0: hardware concurrency
};

// Throws std::invalid_argument describing the first violated constraint.
void validate_config(const ExperimentConfig& cfg);

// Budget translated to fitness evaluations (the "episodes" unit divides by
// episodes-per-evaluation).
long long budget_evaluations(const ExperimentConfig& cfg);

// Everything measured while evaluating one genome for a full lifetime.
struct RunRecord {
  std::string task;
  NetworkKind model = NetworkKind::Sbnn;
  double fitness = 0.0;
  double pre_mean = 0.0;   // mean reward before the prune; NaN for ffnn
  double post_mean = 0.0;  // mean reward after the prune
  std::vector<double> episode_rewards;
  PruneEvent prune;
  int working = 0;              // connections on some input-to-output walk
  int total_connections = 0;
  double working_fraction = 0.0;
  StructureReport structure;
  double elapsed_seconds = 0.0;
  std::uint64_t master_seed = 0;
  int run_index = 0;
  std::uint64_t stream_seed = 0;
};

struct EvaluationOutput {
  RunRecord record;
  NetworkTopology network;        // final pruned, frozen network
  ActivationSchedule schedule;
};

// Evaluates one genome for cfg.episodes episodes. The sbnn lifecycle grows
// weights with the Hebbian rule through episode prune_time, then prunes
// once and runs the rest frozen; fitness is the mean of the before- and
// after-prune reward means. The ffnn is pruned before the first episode
// and its fitness is the plain mean reward. Episode seeds derive from
// stream_seed, so genomes that share it face identical episodes.
EvaluationOutput evaluate_genome(const Eigen::VectorXd& genome,
                                 const ExperimentConfig& cfg,
                                 std::uint64_t stream_seed);

// Model-checked conveniences around evaluate_genome.
RunRecord evaluate_sbnn(const Eigen::VectorXd& genome, const ExperimentConfig& cfg,
                        std::uint64_t stream_seed);
RunRecord evaluate_ffnn(const Eigen::VectorXd& genome, const ExperimentConfig& cfg,
                        std::uint64_t stream_seed);

struct TraceRow {
  long long generation = 0;
  long long evals = 0;     // cumulative evaluations consumed
  double best = 0.0;       // best fitness in the generation
  double median = 0.0;     // median fitness in the generation
  double sigma = 0.0;      // step size after the update
};

struct RunResult {
  int run_index = 0;
  bool ok = false;
  std::string error;
  double best_fitness = 0.0;
  Eigen::VectorXd best_genome;
  RunRecord best_record;
  NetworkTopology best_network;
  ActivationSchedule best_schedule;
  std::vector<TraceRow> trace;
  long long evaluations = 0;
};

// One CMA-ES run. Stops at the first generation boundary at or past the
// budget. All randomness derives from (cfg.seed, run_index).
RunResult evolve_run(const ExperimentConfig& cfg, int run_index);

struct ExperimentSummary {
  std::vector<RunResult> runs;
};

// Runs cfg.runs evolution runs. A run that throws is reported in its
// result and the remaining runs still execute. With cfg.out_dir set, each
// run's artifacts land in <out_dir>/run_NNN (written to a temporary
// directory first, renamed when complete) and <out_dir>/manifest.csv is
// rewritten after every run.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

struct ValidationResult {
  double mean_reward = 0.0;
  std::vector<double> episode_rewards;
};

// Loads a frozen network and evaluates it, plasticity off, on a target
// task seen through a remap. Episode seeds derive from `seed`.
ValidationResult validate_transfer(const std::filesystem::path& network_file,
                                   const std::string& target_task,
                                   const RemapSpec& remap, int episodes,
                                   std::uint64_t seed);

// Aggregates every <dir>/run_*/run_record.json into four CSVs written to
// <dir>: fitness stats, working-connection histogram (10-point bins,
// fractions of runs), structure class counts, and the parameter-count
// comparison table for hidden sizes 1..50. Throws std::runtime_error when
// the directory holds no run records.
std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir);

// Evolved parameter counts for the three setups at I = O = 1: plain
// feedforward weights, feedforward with one ABCD rule per connection, and
// the self-building network's ABCD genome.
struct ParameterCountRow {
  int hidden = 0;
  long long ffnn_weights = 0;
  long long ffnn_abcd = 0;
  long long sbnn_abcd = 0;
};
std::vector<ParameterCountRow> parameter_count_table(int max_hidden = 50);

// RunRecord document; round-trips exactly (doubles keep their bits, the
// ffnn's undefined pre-prune mean is stored as null).
Json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const Json& doc);

}  // namespace sbnn
