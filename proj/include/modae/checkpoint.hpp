#pragma once

#include <string>

#include "modae/gae.hpp"
#include "modae/onestage.hpp"
#include "modae/twostage.hpp"

namespace modae {

enum class ModelKind { kOneStage, kTwoStage, kGae };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

/// Versioned weight container. Text format, one value per token in C hexfloat
/// notation so reloads are bit-exact; layout documented in the README and
/// stable across releases. Optimizer state is not persisted.
struct Checkpoint {
  ModelKind kind = ModelKind::kTwoStage;
  TrainingConfig config;
  int input_dim = 0;
  int n_nodes = 0;
  std::vector<Matrix> weights;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint to_checkpoint(const OneStageModel& model);
Checkpoint to_checkpoint(const TwoStageModel& model);
Checkpoint to_checkpoint(const GaeModel& model, const TrainingConfig& config);

/// Model reconstruction; the graph must match the stored dimensions.
TwoStageModel twostage_from_checkpoint(const Checkpoint& checkpoint);
OneStageModel onestage_from_checkpoint(const Checkpoint& checkpoint, const Graph& g);
GaeModel gae_from_checkpoint(const Checkpoint& checkpoint, const Graph& g);

}  // namespace modae
