#pragma once

// Neural naive Bayes and neural pooled Markov chains of order k.
//
// A PooledScorer applies one two-layer network
//     NN(x) = W2 relu(W1 x + b1) + b2
// to every window (y_t, ..., y_{t+k}) of concatenated embeddings and sums
// the outputs over t. The class posterior is the softmax of that sum;
// k = 0 is the neural naive Bayes, k = 1 and k = 2 the pooled chains.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nnb/core.hpp"

namespace nnb {

inline constexpr std::size_t kDefaultHiddenWidth = 64;

struct MlpSpec {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = kDefaultHiddenWidth;
  std::size_t output_dim = 0;

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

/// The four arrays of a two-layer network, row-major:
/// w1 is hidden x input, b1 hidden, w2 output x hidden, b2 output.
/// The tag keeps parameters, gradients and optimizer moments apart.
template <class Tag>
struct MlpArrays {
  MlpSpec spec;
  Vector w1, b1, w2, b2;

  static MlpArrays zeros(const MlpSpec& spec) {
    spec.validate();
    return MlpArrays{spec,
                     Vector(spec.hidden_dim * spec.input_dim, 0.0),
                     Vector(spec.hidden_dim, 0.0),
                     Vector(spec.output_dim * spec.hidden_dim, 0.0),
                     Vector(spec.output_dim, 0.0)};
  }

  std::array<std::span<double>, 4> arrays() { return {w1, b1, w2, b2}; }
  std::array<std::span<const double>, 4> arrays() const { return {w1, b1, w2, b2}; }

  std::size_t size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  bool operator==(const MlpArrays&) const = default;
};

using MlpParams = MlpArrays<struct MlpParamsTag>;
using GradientSet = MlpArrays<struct GradientSetTag>;

void check_mlp_shapes(const MlpSpec& spec, std::size_t w1, std::size_t b1, std::size_t w2,
                      std::size_t b2);

/// Throws ShapeError when the arrays do not match their spec.
template <class Tag>
void check_shapes(const MlpArrays<Tag>& a) {
  check_mlp_shapes(a.spec, a.w1.size(), a.b1.size(), a.w2.size(), a.b2.size());
}

/// Glorot-uniform weights, zero biases. Deterministic in the seed.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct ForwardCache {
  Vector hidden_pre;  // W1 x + b1
  Vector hidden;      // relu(hidden_pre)
};

struct ForwardResult {
  Vector logits;
  ForwardCache cache;
};

ForwardResult mlp_forward(const MlpParams& params, std::span<const double> x);

/// Concatenated windows of k+1 consecutive vectors. A sequence shorter than
/// k+1 is left-padded with zero vectors and yields a single window.
std::vector<Vector> windows(const EmbeddedSequence& seq, std::size_t order);

class PooledScorer {
 public:
  PooledScorer(std::size_t order, std::size_t embed_dim, MlpParams params);

  /// A freshly initialized scorer for N labels over d-dimensional embeddings.
  static PooledScorer create(std::size_t order, std::size_t embed_dim, std::size_t num_labels,
                             std::size_t hidden_dim, std::uint64_t seed);

  std::size_t order() const noexcept { return order_; }
  std::size_t embed_dim() const noexcept { return embed_dim_; }
  std::size_t num_labels() const noexcept { return params_.spec.output_dim; }
  const MlpSpec& spec() const noexcept { return params_.spec; }
  const MlpParams& params() const noexcept { return params_; }
  MlpParams& mutable_params() noexcept { return params_; }

  bool operator==(const PooledScorer&) const = default;

 private:
  std::size_t order_;
  std::size_t embed_dim_;
  MlpParams params_;
};

/// S_i = sum over windows of NN(window)_i, before the softmax.
Vector pooled_score(const PooledScorer& scorer, const EmbeddedSequence& seq);

Prediction predict(const PooledScorer& scorer, const EmbeddedSequence& seq);

struct LossAndGrad {
  double loss = 0.0;
  GradientSet grad;
};

/// Mean cross-entropy of softmax(pooled_score) over the batch and its exact gradient.
LossAndGrad loss_and_grad(const PooledScorer& scorer, std::span<const LabeledSequence> batch);

/// The loss of loss_and_grad without the backward pass.
double batch_loss(const PooledScorer& scorer, std::span<const LabeledSequence> batch);

}  // namespace nnb
