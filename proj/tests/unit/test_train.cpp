#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pfa/optim.hpp"
#include "pfa/train.hpp"

using namespace pfa;

namespace {

TrainDataset ar1_dataset(std::uint64_t seed, std::size_t windows, std::size_t length) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  TrainDataset d;
  for (std::size_t w = 0; w < windows; ++w) {
    std::vector<double> seq(length);
    double x = 0.0;
    for (auto& v : seq) {
      x = 0.7 * x + 0.1 * z(rng);
      v = x;
    }
    (w % 5 == 0 ? d.validation : d.train).push_back(teacher_forcing(seq));
  }
  return d;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("seeded training is bitwise reproducible") {
  const auto data = ar1_dataset(1, 200, 8);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.max_epochs = 4;
  cfg.seed = 17;
  const ForecastModel init = ForecastModel::random(1, 4, 3);
  const auto a = train(init, data, cfg);
  const auto b = train(init, data, cfg);
  CHECK(a.model.flatten() == b.model.flatten());
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].validation_nll == b.trace[i].validation_nll);

  cfg.seed = 18;
  const auto c = train(init, data, cfg);
  CHECK(c.model.flatten() != a.model.flatten());
}

TEST_CASE("returned checkpoint is the best validation epoch") {
  const auto data = ar1_dataset(2, 300, 8);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.max_epochs = 6;
  const auto r = train(ForecastModel::random(1, 4, 5), data, cfg);
  REQUIRE(r.trace.size() >= 2);
  CHECK(r.trace.front().epoch == 0);
  const double best = r.trace[r.best_epoch].validation_nll;
  CHECK(best <= r.trace.front().validation_nll);
  for (const auto& e : r.trace) CHECK(best <= e.validation_nll);
  CHECK(nll(r.model, data.validation) == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("early stopping honours patience") {
  const auto data = ar1_dataset(3, 60, 6);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.05;
  cfg.patience = 2;
  cfg.max_epochs = 300;
  const auto r = train(ForecastModel::random(1, 3, 1), data, cfg);
  const std::size_t last = r.trace.back().epoch;
  REQUIRE(last < cfg.max_epochs);
  CHECK(last - r.best_epoch == cfg.patience);
}

TEST_CASE("epoch callback sees every record") {
  const auto data = ar1_dataset(4, 50, 6);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.patience = 10;
  std::size_t calls = 0;
  const auto r = train(ForecastModel::random(1, 2, 1), data, cfg, [&](const EpochRecord&) { ++calls; });
  CHECK(calls == r.trace.size());
  CHECK(calls == 4);
}

TEST_CASE("invalid training inputs") {
  TrainDataset empty;
  TrainConfig cfg;
  const ForecastModel m = ForecastModel::random(1, 2, 1);
  CHECK(testing::error_kind_of([&] { train(m, empty, cfg); }) == ErrorKind::data);
  auto data = ar1_dataset(5, 20, 5);
  cfg.patience = 0;
  CHECK(testing::error_kind_of([&] { train(m, data, cfg); }) == ErrorKind::config);
}

TEST_CASE("optimizers") {
  CHECK(parse_optimizer("adam") == OptimizerKind::adam);
  CHECK(to_string(parse_optimizer("rmsprop")) == "rmsprop");
  CHECK(testing::error_kind_of([] { parse_optimizer("sgd"); }) == ErrorKind::config);

  // First RMSProp step: v = 0.1 g^2, so the move is lr / sqrt(0.1) in the gradient's sign.
  Optimizer r(OptimizerKind::rmsprop, 0.01, 1);
  double p[] = {1.0};
  const double g[] = {2.0};
  r.step(p, g);
  CHECK(p[0] == doctest::Approx(1.0 - 0.01 * 2.0 / (std::sqrt(0.4) + 1e-7)).epsilon(1e-15));

  // First Adam step moves by lr regardless of gradient scale.
  Optimizer a(OptimizerKind::adam, 0.01, 1);
  double q[] = {1.0};
  const double big[] = {1000.0};
  a.step(q, big);
  CHECK(q[0] == doctest::Approx(0.99).epsilon(1e-9));

  std::vector<double> grad{3.0, 4.0};
  CHECK(clip_global_norm(grad, 1.0) == 5.0);
  CHECK(grad[0] == doctest::Approx(0.6));
  CHECK(grad[1] == doctest::Approx(0.8));
  std::vector<double> small{0.3, 0.4};
  clip_global_norm(small, 1.0);
  CHECK(small[0] == 0.3);
}

}  // TEST_SUITE
