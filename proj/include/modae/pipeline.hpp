#pragma once

#include <string>
#include <vector>

#include "modae/checkpoint.hpp"
#include "modae/report.hpp"
#include "modae/synthetic.hpp"

namespace modae {

/// One experiment: dataset (or synthetic source), model kind, training
/// configuration, clustering policy, seeds, and output location.
struct ExperimentSpec {
  std::string edges_path;
  std::string features_path;  // optional
  std::string labels_path;    // optional
  bool directed_hint = false;

  ModelKind model = ModelKind::kTwoStage;
  TrainingConfig config;

  int k = 0;            // fixed community count; 0 = derive from labels or sweep
  int k_min = 0;        // sweep range (used when k == 0 and k_min > 0)
  int k_max = 0;
  int restarts = 10;
  bool require_labels = false;  // error out when label-based metrics are impossible

  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double split_fraction = 0.2;

  bool synthetic = false;  // generate the graph instead of loading it
  PlantedConfig planted;

  std::string out_dir;

  void validate() const;
  std::map<std::string, std::string> echo() const;
};

/// key = value text config; '#' comments. Unknown keys are an error.
void apply_config_file(const std::string& path, ExperimentSpec& spec);

Graph load_experiment_graph(const ExperimentSpec& spec);

/// Clustering policy shared by train and eval: fixed k, else ground-truth k,
/// else a Q-maximizing sweep.
struct ClusterOutcome {
  CommunityAssignment assignment;
  int chosen_k = 0;
  std::vector<std::array<double, 3>> sweep_rows;  // k,q,inertia when swept
};
ClusterOutcome cluster_embedding(const Matrix& z, const Graph& g, const ExperimentSpec& spec,
                                 uint64_t seed);

/// Trains one model per seed, persists checkpoints / embeddings / assignments
/// / report under spec.out_dir, and returns the report.
RunReport run_train(const ExperimentSpec& spec);

/// Reclusters and rescores a stored checkpoint on a dataset.
RunReport run_eval(const std::string& checkpoint_path, const ExperimentSpec& spec);

/// Held-out inference benchmark over the five variants.
struct InferVariantStats {
  std::string name;
  double mean_latency_us = 0.0;
  double speedup_vs_plain3 = 0.0;
  std::optional<double> nmi;
  double finetune_seconds = 0.0;
};
struct InferBenchReport {
  std::vector<InferVariantStats> variants;  // plain1, apam1, plain2, apam2, plain3
  int held_out_nodes = 0;
  int skipped_isolated = 0;
  std::vector<std::string> notes;
  std::string to_csv() const;
  std::string to_json() const;
  const InferVariantStats& variant(const std::string& name) const;
};
InferBenchReport run_infer_bench(const ExperimentSpec& spec);

/// Per-epoch wall time as a function of N, with least-squares log-log slopes.
struct ScalingSpec {
  std::vector<int> n_list;
  double avg_degree = 10.0;
  std::vector<ModelKind> models;
  uint64_t seed = 1;
  int repeats = 3;
  std::string out_dir;
};
struct ScalingPoint {
  ModelKind model;
  int n = 0;
  double seconds = 0.0;  // median over repeats
};
struct ScalingReport {
  std::vector<ScalingPoint> points;
  std::map<std::string, double> slopes;  // model kind name -> fitted slope
  std::string to_csv() const;
  std::string to_json() const;
};
ScalingReport run_scaling(const ScalingSpec& spec);

/// Finite-difference audit of every analytic gradient in the package.
struct GradCheckSummary {
  struct Entry {
    std::string name;
    double max_rel_error = 0.0;
    long instances = 0;
    bool passed = false;
  };
  std::vector<Entry> entries;
  bool all_passed() const;
};
GradCheckSummary run_gradcheck(int instances, double tolerance, uint64_t seed);

double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace modae
