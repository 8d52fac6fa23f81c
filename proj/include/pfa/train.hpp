#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pfa/model.hpp"
#include "pfa/optim.hpp"

namespace pfa {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 2048;
  std::size_t patience = 20;
  std::size_t max_epochs = 200;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  double clip_norm = 10.0;
  std::uint64_t seed = 0;
};

struct TrainDataset {
  std::vector<TeacherForcedSample> train;
  std::vector<TeacherForcedSample> validation;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_nll = 0.0;
  double validation_nll = 0.0;
};

struct TrainResult {
  ForecastModel model;  // best-validation parameters
  std::vector<EpochRecord> trace;
  std::size_t best_epoch = 0;
};

/// Teacher-forced NLL minimisation with minibatches and early stopping on the
/// validation NLL. Deterministic given config.seed.
TrainResult train(const ForecastModel& init, const TrainDataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace pfa
