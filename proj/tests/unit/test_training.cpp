#include <cmath>
#include <random>

#include "doctest.h"
#include "nnb/errors.hpp"
#include "nnb/training.hpp"
#include "test_support.hpp"

using namespace nnb;

namespace {

// 32 points, two per row: label 1 iff x0 + x1 > 0, with a margin of at least 0.5.
std::vector<LabeledSequence> separable_toy(std::uint64_t seed, std::size_t count = 32) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<LabeledSequence> out;
  while (out.size() < count) {
    const double a = u(rng), b = u(rng);
    if (std::abs(a + b) < 0.5) continue;
    out.push_back({EmbeddedSequence({{a, b}}), a + b > 0 ? 1u : 0u});
  }
  return out;
}

double bowl(const Vector& p) { return (p[0] - 1) * (p[0] - 1) + 3 * (p[1] + 2) * (p[1] + 2); }

}  // namespace

TEST_CASE("TrainConfig defaults and validation") {
  const TrainConfig c;
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.batch_size == 64);
  CHECK(c.epochs == 5);
  CHECK(c.runs == 5);
  CHECK(c.beta1 == 0.9);
  CHECK(c.beta2 == 0.999);
  CHECK(c.epsilon == 1e-8);
  CHECK_NOTHROW(c.validate());
  TrainConfig bad;
  bad.learning_rate = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = {};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = {};
  bad.runs = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("adam") {
  const TrainConfig config;
  SUBCASE("zero gradient leaves parameters and decays moments") {
    Vector p{1, -2}, g{0, 0}, m(2, 0), v(2, 0);
    adam_update(p, g, m, v, 1, config);
    CHECK(p == Vector{1, -2});
    Vector warm_m{0.5, -0.5}, warm_v{0.25, 0.25};
    adam_update(p, g, warm_m, warm_v, 3, config);
    CHECK(warm_m[0] == doctest::Approx(0.45));
    CHECK(warm_v[0] == doctest::Approx(0.25 * 0.999));
  }
  SUBCASE("first step moves each coordinate by lr against the gradient sign") {
    Vector p{0, 0, 0}, g{3, -0.2, 50}, m(3, 0), v(3, 0);
    adam_update(p, g, m, v, 1, config);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(p[i] == doctest::Approx(-1e-3 * g[i] / (std::abs(g[i]) + 1e-8)).epsilon(1e-12));
    }
  }
  SUBCASE("adam_step counts steps and checks shapes") {
    auto params = MlpParams::zeros({2, 3, 2});
    auto grads = GradientSet::zeros({2, 3, 2});
    grads.b2 = {1, -1};
    auto state = AdamState::zeros(params.spec);
    adam_step(params, grads, state, config);
    adam_step(params, grads, state, config);
    CHECK(state.step == 2);
    CHECK(params.b2[0] == doctest::Approx(-2e-3).epsilon(1e-9));
    auto wrong = GradientSet::zeros({3, 3, 2});
    CHECK_THROWS_AS(adam_step(params, wrong, state, config), ShapeError);
  }
  SUBCASE("quadratic bowl") {
    TrainConfig c;
    c.learning_rate = 0.1;
    Vector p{-1, 1}, m(2, 0), v(2, 0);
    const double initial = bowl(p);
    std::vector<double> losses;
    for (std::uint64_t step = 1; step <= 100; ++step) {
      const Vector g{2 * (p[0] - 1), 6 * (p[1] + 2)};
      adam_update(p, g, m, v, step, c);
      losses.push_back(bowl(p));
    }
    for (std::size_t i = 10; i < 30; ++i) CHECK(losses[i] < losses[i - 1]);
    CHECK(losses.back() < 0.01 * initial);
  }
}

TEST_CASE("select_best_epoch") {
  const std::vector<EpochLog> log{{1, 0, 0.3}, {2, 0, 0.2}, {3, 0, 0.2}, {4, 0, 0.4}, {5, 0, 0.5}};
  CHECK(select_best_epoch(log) == 2);
  const std::vector<EpochLog> flat{{0, 0, 0.5}, {1, 0, 0.5}};
  CHECK(select_best_epoch(flat) == 0);
  CHECK_THROWS_AS(select_best_epoch(std::vector<EpochLog>{}), EmptyData);
}

TEST_CASE("train") {
  const auto data = separable_toy(5);
  TrainConfig config;
  config.learning_rate = 0.05;
  config.batch_size = 8;
  config.epochs = 50;
  config.seed = 3;
  const auto initial = PooledScorer::create(0, 2, 2, 16, 1);

  SUBCASE("overfits a separable toy set") {
    const auto result = train(initial, data, data, config);
    CHECK(result.log.size() == 50);
    CHECK(evaluate(result.best, data) == 0.0);
    CHECK(result.log[result.best_epoch - 1].validation_error == 0.0);
  }
  SUBCASE("deterministic") {
    config.epochs = 4;
    const auto a = train(initial, data, data, config), b = train(initial, data, data, config);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t e = 0; e < a.log.size(); ++e) {
      CHECK(a.log[e].train_loss == b.log[e].train_loss);
      CHECK(a.log[e].validation_error == b.log[e].validation_error);
    }
    CHECK(a.best == b.best);
  }
  SUBCASE("epoch 0 evaluation never selects worse than the start") {
    config.epochs = 3;
    config.learning_rate = 1e-3;
    config.evaluate_initial = true;
    const auto val = separable_toy(6, 16);
    const auto result = train(initial, data, val, config);
    CHECK(result.log.front().epoch == 0);
    CHECK(result.log.size() == 4);
    CHECK(evaluate(result.best, val) <= evaluate(initial, val));
  }
  SUBCASE("training loss does not rise on the toy set") {
    config.epochs = 10;
    const auto result = train(initial, data, data, config);
    CHECK(batch_loss(result.best, data) <= batch_loss(initial, data));
  }
  SUBCASE("empty splits") {
    CHECK_THROWS_AS(train(initial, std::vector<LabeledSequence>{}, data, config), EmptyData);
    CHECK_THROWS_AS(train(initial, data, std::vector<LabeledSequence>{}, config), EmptyData);
  }
}

TEST_CASE("evaluate and error_rate") {
  const std::vector<std::size_t> truth{0, 1, 1, 0, 1, 0, 0, 1};
  CHECK(error_rate(truth, truth) == 0.0);
  const std::vector<std::size_t> flipped{1, 0, 0, 1, 0, 1, 1, 0};
  CHECK(error_rate(flipped, truth) == 1.0);
  const std::vector<std::size_t> three{1, 0, 0, 0, 1, 0, 0, 1};
  CHECK(error_rate(three, truth) == 0.375);
  CHECK_THROWS_AS(error_rate(std::vector<std::size_t>{}, std::vector<std::size_t>{}), EmptyData);

  const GaussianNB model(ProbVector::uniform(2), {-1, 1}, {1, 1});
  const std::vector<LabeledSequence> set{{EmbeddedSequence(1, 1, {-2.0}), 0}, {EmbeddedSequence(1, 1, {2.0}), 1},
                                         {EmbeddedSequence(1, 1, {3.0}), 0}};
  CHECK(evaluate(model, set) == doctest::Approx(1.0 / 3.0));
  CHECK(predict_labels(model, set) == std::vector<std::size_t>{0, 1, 1});
}

TEST_CASE("summarize_runs and multi_run") {
  const auto constant = summarize_runs({0.1, 0.1, 0.1});
  CHECK(constant.mean == doctest::Approx(0.1));
  CHECK(constant.half_width == 0.0);
  const auto two = summarize_runs({0.1, 0.2});
  CHECK(two.mean == doctest::Approx(0.15).epsilon(1e-15));
  // Frozen from the declared formula 1.96 * s / sqrt(n).
  CHECK(two.half_width == doctest::Approx(0.09800000000000002).epsilon(1e-14));
  CHECK(summarize_runs({0.3}).half_width == 0.0);

  TrainConfig config;
  config.seed = 40;
  std::vector<std::uint64_t> seen;
  const auto report = multi_run(
      [&](std::uint64_t seed) {
        seen.push_back(seed);
        return static_cast<double>(seed % 3) / 10.0;
      },
      config);
  CHECK(seen == std::vector<std::uint64_t>{40, 41, 42, 43, 44});
  CHECK(report.run_errors == std::vector<double>{0.1, 0.2, 0.0, 0.1, 0.2});
  CHECK(report.mean == doctest::Approx(0.12));
}

TEST_CASE("multi_run over real training is reproducible") {
  const auto data = separable_toy(9);
  TrainConfig config;
  config.runs = 3;
  config.epochs = 2;
  config.batch_size = 8;
  const auto once = [&](std::uint64_t seed) {
    TrainConfig c = config;
    c.seed = seed;
    const auto r = train(PooledScorer::create(1, 2, 2, 4, seed), data, data, c);
    return evaluate(r.best, data);
  };
  const auto a = multi_run(once, config), b = multi_run(once, config);
  CHECK(a.run_errors == b.run_errors);
  CHECK(a.half_width == b.half_width);
  for (double e : a.run_errors) {
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
  }
}

TEST_CASE("report json") {
  const auto report = summarize_runs({0.125, 0.25, 1.0 / 3.0});
  const auto text = report_to_json(report);
  CHECK(text.find("\"confidence\": 0.95") != std::string::npos);
  const auto back = report_from_json(text);
  CHECK(back.run_errors == report.run_errors);
  CHECK(back.mean == report.mean);
  CHECK(back.half_width == report.half_width);
  CHECK_THROWS_AS(report_from_json("{\"mean\": 1}"), FormatError);
  CHECK(epoch_log_line({2, 0.5, 0.25}, 1) ==
        "{\"run\":1,\"epoch\":2,\"train_loss\":0.5,\"validation_error\":0.25}");
}
