#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nnb/core.hpp"
#include "nnb/gaussian.hpp"
#include "nnb/neural.hpp"

namespace nnb {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  std::size_t runs = 5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Also evaluate the initial parameters as epoch 0, eligible for selection.
  bool evaluate_initial = false;

  void validate() const;
};

using MomentSet = MlpArrays<struct MomentSetTag>;

struct AdamState {
  MomentSet first;
  MomentSet second;
  std::uint64_t step = 0;

  static AdamState zeros(const MlpSpec& spec);
};

/// One bias-corrected Adam update of a flat parameter array. `step` is the
/// 1-based index of this update.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first,
                 std::span<double> second, std::uint64_t step, const TrainConfig& config);

/// Increments state.step and applies adam_update to all four arrays.
void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state, const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_error = 0.0;
};

/// Epoch with the lowest validation error; the earliest one on ties.
std::size_t select_best_epoch(std::span<const EpochLog> log);

struct TrainResult {
  PooledScorer best;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
};

/// Mini-batch Adam on the mean cross-entropy. The training set is reshuffled
/// every epoch from a generator seeded with config.seed; the last batch may be
/// short. Returns the parameters of the epoch with the best validation error.
TrainResult train(const PooledScorer& initial, std::span<const LabeledSequence> train_set,
                  std::span<const LabeledSequence> validation_set, const TrainConfig& config);

double error_rate(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

std::vector<std::size_t> predict_labels(const PooledScorer& model, std::span<const LabeledSequence> data);
std::vector<std::size_t> predict_labels(const GaussianNB& model, std::span<const LabeledSequence> data);

/// Fraction of misclassified examples.
double evaluate(const PooledScorer& model, std::span<const LabeledSequence> test_set);
double evaluate(const GaussianNB& model, std::span<const LabeledSequence> test_set);

struct EvalReport {
  std::vector<double> run_errors;
  double mean = 0.0;
  /// 1.96 * s / sqrt(runs) with s the sample standard deviation; 0 when all runs agree.
  double half_width = 0.0;
};

EvalReport summarize_runs(std::vector<double> run_errors);

/// Calls run_once(config.seed + r) for r = 0 .. runs-1 and summarizes the errors.
EvalReport multi_run(const std::function<double(std::uint64_t seed)>& run_once, const TrainConfig& config);

/// Indented JSON object with the keys mean, half_width, confidence (0.95) and runs.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// One JSON object per line: {"run":..,"epoch":..,"train_loss":..,"validation_error":..}
std::string epoch_log_line(const EpochLog& entry, std::size_t run);

}  // namespace nnb
