#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexact/model.hpp"

namespace flexact {

/// One model variant in the comparison grid: either the routed model with a
/// given KL weight, or a fixed-activation baseline.
struct ModelArm {
  bool routed = true;
  double alpha = 0.3;                          // routed arms
  Activation fixed_kind = Activation::kRelu;   // fixed arms

  std::string name() const;

  static ModelArm flex(double alpha);
  static ModelArm fixed(Activation kind);
};

struct ExperimentSpec {
  std::vector<Activation> truths;
  std::vector<ModelArm> models;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  DatasetSpec data;
  double train_fraction = 0.8;
  std::string out_dir = "out";
  int jobs = 0;  // 0 -> hardware concurrency
  bool export_data = false;
};

/// The full comparison grid: 5 truths x (flex 0.3, flex 0.0, 5 fixed) x 5 seeds.
ExperimentSpec default_grid();

struct RunRecord {
  Activation truth = Activation::kRelu;
  ModelArm model;
  std::uint64_t seed = 0;
  double test_mse = 0.0;
  Activation selected = Activation::kRelu;  // hard selection (routed runs)
  bool diverged = false;
  int diverged_epoch = -1;
  TrainTrace trace;
  Network final_net;
  double seconds = 0.0;
};

struct SummaryTable {
  std::vector<ModelArm> models;
  std::vector<Activation> truths;
  // indexed [model][truth]
  std::vector<std::vector<double>> mean_mse;
  std::vector<std::vector<double>> std_mse;
  std::vector<std::vector<double>> match_fraction;  // routed arms; -1 for fixed
  std::vector<std::vector<int>> diverged_count;
  std::vector<RunRecord> runs;
};

struct CliHelp : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses CLI flags (optionally layered over a --config key=value file; CLI
/// wins) into a grid spec. Throws std::invalid_argument on bad input and
/// CliHelp when --help is requested.
ExperimentSpec parse_cli(const std::vector<std::string>& args);

/// Trains and evaluates one grid cell. Pure compute, no file output; a
/// diverged run is returned as a failed record, never dropped.
RunRecord run_cell(Activation truth, const ModelArm& model, std::uint64_t seed,
                   const ExperimentSpec& spec);

/// Runs every cell (concurrently up to spec.jobs), writes per-run artifacts
/// under <out>/runs/<truth>_<model>_<seed>/ and the grid summaries
/// <out>/summary.csv, <out>/summary.json, <out>/metadata.json.
SummaryTable run_grid(const ExperimentSpec& spec);

/// Selection-probability trajectories, one line per candidate in catalog
/// order. Rejects fixed-model records.
void emit_trajectory_plot(const RunRecord& record, const std::string& path);

/// Scatter of the informative input against predicted and true targets.
void emit_fit_plot(const RunRecord& record, const Dataset& test,
                   std::size_t informative_index, const std::string& path);

void write_summary_csv(const SummaryTable& table, const std::string& path);
void write_summary_json(const SummaryTable& table, const std::string& path);

}  // namespace flexact
