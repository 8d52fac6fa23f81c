#include "pfa/train.hpp"

#include <algorithm>
#include <numeric>

#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

TrainResult train(const ForecastModel& init, const TrainDataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (data.train.empty()) fail(ErrorKind::data, "training set is empty");
  if (data.validation.empty()) fail(ErrorKind::data, "validation set is empty");
  if (config.patience < 1) fail(ErrorKind::config, "patience must be at least 1");
  if (config.batch_size < 1) fail(ErrorKind::config, "batch size must be at least 1");

  ForecastModel model = init;
  std::vector<double> params = model.flatten();
  Optimizer opt(config.optimizer, config.learning_rate, params.size());
  Rng rng(mix_seed(config.seed, 0x747261696eULL));

  TrainResult result;
  result.model = model;
  EpochRecord first{0, nll(model, data.train), nll(model, data.validation)};
  result.trace.push_back(first);
  if (on_epoch) on_epoch(first);
  double best = first.validation_nll;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TeacherForcedSample> batch;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data.train[order[i]]);
      double loss = 0.0;
      std::vector<double> grad = nll_gradient(model, batch, &loss);
      clip_global_norm(grad, config.clip_norm);
      opt.step(params, grad);
      model.assign(params);
      if (!model.all_finite()) fail(ErrorKind::numeric, "training diverged (non-finite parameters)");
      loss_sum += loss;
      ++batches;
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), nll(model, data.validation)};
    result.trace.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.validation_nll < best) {
      best = rec.validation_nll;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace pfa
