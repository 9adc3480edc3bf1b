#include "nnb/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "nnb/errors.hpp"

namespace nnb {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0");
  if (batch_size < 1) throw InvalidInput("batch size must be >= 1");
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (runs < 1) throw InvalidInput("runs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidInput("Adam decay rates must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidInput("Adam epsilon must be > 0");
}

AdamState AdamState::zeros(const MlpSpec& spec) {
  return AdamState{MomentSet::zeros(spec), MomentSet::zeros(spec), 0};
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first,
                 std::span<double> second, std::uint64_t step, const TrainConfig& config) {
  if (grads.size() != params.size() || first.size() != params.size() || second.size() != params.size()) {
    throw ShapeError("Adam arrays differ in size");
  }
  if (step == 0) throw InvalidInput("Adam step index is 1-based");
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t j = 0; j < params.size(); ++j) {
    first[j] = config.beta1 * first[j] + (1.0 - config.beta1) * grads[j];
    second[j] = config.beta2 * second[j] + (1.0 - config.beta2) * grads[j] * grads[j];
    const double m_hat = first[j] / correction1;
    const double v_hat = second[j] / correction2;
    params[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state, const TrainConfig& config) {
  if (!(params.spec == grads.spec) || !(params.spec == state.first.spec) ||
      !(params.spec == state.second.spec)) {
    throw ShapeError("parameters, gradients and optimizer state disagree on the network shape");
  }
  check_shapes(params);
  check_shapes(grads);
  ++state.step;
  auto p = params.arrays();
  auto g = grads.arrays();
  auto m = state.first.arrays();
  auto v = state.second.arrays();
  for (std::size_t k = 0; k < p.size(); ++k) adam_update(p[k], g[k], m[k], v[k], state.step, config);
}

std::size_t select_best_epoch(std::span<const EpochLog> log) {
  if (log.empty()) throw EmptyData("no epochs to select from");
  const auto it = std::min_element(log.begin(), log.end(), [](const EpochLog& a, const EpochLog& b) {
    return a.validation_error < b.validation_error;
  });
  return it->epoch;
}

TrainResult train(const PooledScorer& initial, std::span<const LabeledSequence> train_set,
                  std::span<const LabeledSequence> validation_set, const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw EmptyData("training set is empty");
  if (validation_set.empty()) throw EmptyData("validation set is empty");

  PooledScorer current = initial;
  AdamState state = AdamState::zeros(current.spec());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{initial, 0, {}};
  double best_error = 2.0;
  auto record = [&](const EpochLog& entry) {
    result.log.push_back(entry);
    if (entry.validation_error < best_error) {
      best_error = entry.validation_error;
      result.best = current;
      result.best_epoch = entry.epoch;
    }
  };

  if (config.evaluate_initial) {
    record({0, batch_loss(current, train_set), evaluate(current, validation_set)});
  }

  std::vector<LabeledSequence> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t j = start; j < stop; ++j) batch.push_back(train_set[order[j]]);
      const LossAndGrad lg = loss_and_grad(current, batch);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      adam_step(current.mutable_params(), lg.grad, state, config);
    }
    record({epoch, loss_sum / static_cast<double>(train_set.size()), evaluate(current, validation_set)});
  }
  return result;
}

double error_rate(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (truth.empty()) throw EmptyData("cannot compute an error rate on an empty set");
  if (predicted.size() != truth.size()) throw ShapeError("prediction and truth lengths differ");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<std::size_t> predict_labels(const PooledScorer& model, std::span<const LabeledSequence> data) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(argmax_index(pooled_score(model, ex.sequence)));
  return out;
}

std::vector<std::size_t> predict_labels(const GaussianNB& model, std::span<const LabeledSequence> data) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(gaussian_nb_predict(model, ex.sequence).label);
  return out;
}

namespace {
template <class Model>
double evaluate_model(const Model& model, std::span<const LabeledSequence> test_set) {
  if (test_set.empty()) throw EmptyData("test set is empty");
  std::vector<std::size_t> truth;
  truth.reserve(test_set.size());
  for (const auto& ex : test_set) truth.push_back(ex.label);
  return error_rate(predict_labels(model, test_set), truth);
}
}  // namespace

double evaluate(const PooledScorer& model, std::span<const LabeledSequence> test_set) {
  return evaluate_model(model, test_set);
}

double evaluate(const GaussianNB& model, std::span<const LabeledSequence> test_set) {
  return evaluate_model(model, test_set);
}

EvalReport summarize_runs(std::vector<double> run_errors) {
  if (run_errors.empty()) throw EmptyData("no runs to summarize");
  EvalReport report;
  const double n = static_cast<double>(run_errors.size());
  report.mean = std::accumulate(run_errors.begin(), run_errors.end(), 0.0) / n;
  const bool all_equal =
      std::adjacent_find(run_errors.begin(), run_errors.end(), std::not_equal_to<>()) == run_errors.end();
  if (!all_equal) {
    double ss = 0.0;
    for (double e : run_errors) ss += (e - report.mean) * (e - report.mean);
    report.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  report.run_errors = std::move(run_errors);
  return report;
}

EvalReport multi_run(const std::function<double(std::uint64_t)>& run_once, const TrainConfig& config) {
  config.validate();
  std::vector<double> errors;
  errors.reserve(config.runs);
  for (std::size_t r = 0; r < config.runs; ++r) errors.push_back(run_once(config.seed + r));
  return summarize_runs(std::move(errors));
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mean"] = report.mean;
  j["half_width"] = report.half_width;
  j["confidence"] = 0.95;
  j["runs"] = report.run_errors;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport report;
    report.run_errors = j.at("runs").get<std::vector<double>>();
    report.mean = j.at("mean").get<double>();
    report.half_width = j.at("half_width").get<double>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string epoch_log_line(const EpochLog& entry, std::size_t run) {
  nlohmann::ordered_json j;
  j["run"] = run;
  j["epoch"] = entry.epoch;
  j["train_loss"] = entry.train_loss;
  j["validation_error"] = entry.validation_error;
  return j.dump();
}

}  // namespace nnb
