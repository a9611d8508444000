// Command-line front end: train / eval / infer-bench / scaling / gradcheck.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modae/pipeline.hpp"

namespace {

using namespace modae;

struct CommonFlags {
  std::string config_file;
  std::string edges, features, labels;
  std::string model = "twostage";
  std::string layers;
  double lr = -1.0;
  int epochs = -1;
  int batch = -1;
  int samples = -1;
  std::string decoder;
  int k = -1;
  std::string k_range;
  int restarts = -1;
  std::string seeds;
  double split = -1.0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "key = value config file; flags override it");
  cmd->add_option("--edges", f.edges, "edge list file");
  cmd->add_option("--features", f.features, "node feature file");
  cmd->add_option("--labels", f.labels, "ground-truth label file");
  cmd->add_option("--model", f.model, "onestage | twostage | gae")
      ->check(CLI::IsMember({"onestage", "twostage", "gae"}));
  cmd->add_option("--layers", f.layers, "comma-separated layer output dims (default 32,16)");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--batch", f.batch, "minibatch size p");
  cmd->add_option("--samples", f.samples, "neighbor sample count k");
  cmd->add_option("--decoder", f.decoder, "identity | tanh")
      ->check(CLI::IsMember({"identity", "tanh", ""}));
  cmd->add_option("--k", f.k, "community count for clustering");
  cmd->add_option("--k-range", f.k_range, "sweep range min:max when k is unknown");
  cmd->add_option("--restarts", f.restarts, "clustering restarts");
  cmd->add_option("--seeds", f.seeds, "comma-separated seed list");
  cmd->add_option("--split", f.split, "held-out fraction for inference runs");
  cmd->add_option("--out", f.out, "output directory");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::string tok;
  std::istringstream ss(s);
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

ExperimentSpec build_spec(const CommonFlags& f, bool model_flag_given) {
  // resolve the model kind first: flag > config file > default
  ModelKind kind = model_kind_from_name(f.model);
  if (!model_flag_given && !f.config_file.empty()) {
    ExperimentSpec probe;
    apply_config_file(f.config_file, probe);
    kind = probe.model;
  }

  ExperimentSpec spec;
  spec.model = kind;
  if (kind == ModelKind::kTwoStage) {
    // desk-scale two-stage defaults; full-batch models keep lr 0.01 / 200 epochs
    spec.config.learning_rate = 0.015;
    spec.config.epochs = 50;
  }
  if (!f.config_file.empty()) apply_config_file(f.config_file, spec);
  spec.model = kind;
  if (!f.edges.empty()) spec.edges_path = f.edges;
  if (!f.features.empty()) spec.features_path = f.features;
  if (!f.labels.empty()) spec.labels_path = f.labels;
  if (!f.layers.empty()) spec.config.layer_dims = parse_int_list(f.layers);
  if (f.lr > 0) spec.config.learning_rate = f.lr;
  if (f.epochs >= 0) spec.config.epochs = f.epochs;
  if (f.batch > 0) spec.config.minibatch_size = f.batch;
  if (f.samples > 0) spec.config.neighbor_samples = f.samples;
  if (!f.decoder.empty()) {
    spec.config.decoder = f.decoder == "tanh" ? Decoder::kTanh : Decoder::kIdentity;
  }
  if (f.k >= 0) spec.k = f.k;
  if (!f.k_range.empty()) {
    auto colon = f.k_range.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--k-range wants min:max");
    spec.k_min = std::stoi(f.k_range.substr(0, colon));
    spec.k_max = std::stoi(f.k_range.substr(colon + 1));
  }
  if (f.restarts > 0) spec.restarts = f.restarts;
  if (!f.seeds.empty()) {
    spec.seeds.clear();
    std::string tok;
    std::istringstream ss(f.seeds);
    while (std::getline(ss, tok, ',')) spec.seeds.push_back(std::stoull(tok));
  }
  if (f.split >= 0) spec.split_fraction = f.split;
  if (!f.out.empty()) spec.out_dir = f.out;
  if (spec.out_dir.empty()) spec.out_dir = "out";
  return spec;
}

void print_report_summary(const RunReport& report) {
  for (const auto& s : report.per_seed) {
    std::printf("seed %llu: k=%d", static_cast<unsigned long long>(s.seed), s.chosen_k);
    if (s.q) std::printf(" Q=%.4f", *s.q);
    if (s.nmi) std::printf(" NMI=%.4f", *s.nmi);
    if (s.ac) std::printf(" AC=%.4f", *s.ac);
    std::printf("\n");
  }
  if (auto v = report.best_nmi()) std::printf("best NMI %.4f\n", *v);
  if (auto v = report.median_nmi()) std::printf("median NMI %.4f\n", *v);
  if (auto v = report.best_q()) std::printf("best Q %.4f\n", *v);
  for (const auto& note : report.notes) std::printf("note: %s\n", note.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"community detection by modularity-matrix reconstruction"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train models and extract communities");
  add_common(train_cmd, train_flags);
  bool expect_label_metrics = false;
  train_cmd->add_flag("--expect-nmi", expect_label_metrics,
                      "fail when label-based metrics cannot be computed");

  CommonFlags eval_flags;
  std::string eval_checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "recluster and score a stored checkpoint");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();

  CommonFlags bench_flags;
  int bench_synthetic_n = 0;
  double bench_avg_degree = 10.0;
  int bench_communities = 10;
  auto* bench_cmd = app.add_subcommand("infer-bench", "held-out inference latency/accuracy table");
  add_common(bench_cmd, bench_flags);
  bench_cmd->add_option("--synthetic-n", bench_synthetic_n,
                        "use a generated planted-partition graph of this size");
  bench_cmd->add_option("--avg-degree", bench_avg_degree, "synthetic mean degree");
  bench_cmd->add_option("--communities", bench_communities, "synthetic community count");

  std::string scaling_sizes = "1000,2000,4000,8000";
  std::string scaling_models = "twostage";
  double scaling_degree = 10.0;
  uint64_t scaling_seed = 1;
  std::string scaling_out = "out";
  auto* scaling_cmd = app.add_subcommand("scaling", "per-epoch wall time vs N with fitted slopes");
  scaling_cmd->add_option("--n-list", scaling_sizes, "comma-separated graph sizes (ascending)");
  scaling_cmd->add_option("--models", scaling_models, "comma list of onestage,twostage");
  scaling_cmd->add_option("--avg-degree", scaling_degree, "synthetic mean degree");
  scaling_cmd->add_option("--seed", scaling_seed, "root seed");
  scaling_cmd->add_option("--out", scaling_out, "output directory");

  int gc_instances = 20;
  double gc_tolerance = 1e-4;
  uint64_t gc_seed = 1;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference audit of analytic gradients");
  gc_cmd->add_option("--instances", gc_instances, "random instances per gradient family");
  gc_cmd->add_option("--tolerance", gc_tolerance, "max allowed relative error");
  gc_cmd->add_option("--seed", gc_seed, "root seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      ExperimentSpec spec = build_spec(train_flags, train_cmd->count("--model") > 0);
      spec.require_labels = expect_label_metrics;
      RunReport report = run_train(spec);
      print_report_summary(report);
      std::printf("outputs in %s\n", spec.out_dir.c_str());
    } else if (eval_cmd->parsed()) {
      ExperimentSpec spec = build_spec(eval_flags, eval_cmd->count("--model") > 0);
      RunReport report = run_eval(eval_checkpoint, spec);
      print_report_summary(report);
      std::printf("outputs in %s\n", spec.out_dir.c_str());
    } else if (bench_cmd->parsed()) {
      ExperimentSpec spec = build_spec(bench_flags, bench_cmd->count("--model") > 0);
      if (spec.config.layer_dims.size() != 3) spec.config.layer_dims = {32, 32, 16};
      if (bench_synthetic_n > 0) {
        spec.synthetic = true;
        spec.planted.n_nodes = bench_synthetic_n;
        spec.planted.avg_degree = bench_avg_degree;
        spec.planted.communities = bench_communities;
      }
      InferBenchReport report = run_infer_bench(spec);
      std::printf("%s", report.to_csv().c_str());
      std::printf("outputs in %s\n", spec.out_dir.c_str());
    } else if (scaling_cmd->parsed()) {
      ScalingSpec spec;
      for (int n : parse_int_list(scaling_sizes)) spec.n_list.push_back(n);
      {
        std::string tok;
        std::istringstream ss(scaling_models);
        while (std::getline(ss, tok, ',')) spec.models.push_back(model_kind_from_name(tok));
      }
      spec.avg_degree = scaling_degree;
      spec.seed = scaling_seed;
      spec.out_dir = scaling_out;
      ScalingReport report = run_scaling(spec);
      std::printf("%s", report.to_csv().c_str());
      for (const auto& [name, slope] : report.slopes) {
        std::printf("slope %s %.3f\n", name.c_str(), slope);
      }
    } else if (gc_cmd->parsed()) {
      GradCheckSummary summary = run_gradcheck(gc_instances, gc_tolerance, gc_seed);
      for (const auto& e : summary.entries) {
        std::printf("%-26s max_rel_error=%.3e instances=%ld %s\n", e.name.c_str(),
                    e.max_rel_error, e.instances, e.passed ? "ok" : "FAIL");
      }
      return summary.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 0;
}
