#include "nnb/neural.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "nnb/errors.hpp"

namespace nnb {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using WindowMap = Eigen::Map<const RowMatrix, Eigen::Unaligned, Eigen::OuterStride<>>;

// Windows of a row-major sequence are overlapping rows of stride d, so they
// can be read in place; only sequences shorter than the window need a copy.
class WindowMatrix {
 public:
  WindowMatrix(const EmbeddedSequence& seq, std::size_t order)
      : cols_((order + 1) * seq.dim()), source_(seq.data().data()) {
    if (seq.length() >= order + 1) {
      rows_ = seq.length() - order;
      stride_ = seq.dim();
    } else {
      rows_ = 1;
      stride_ = cols_;
      padded_.assign(cols_, 0.0);
      std::copy(seq.data().begin(), seq.data().end(),
                padded_.end() - static_cast<std::ptrdiff_t>(seq.data().size()));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  WindowMap map() const {
    const double* base = padded_.empty() ? source_ : padded_.data();
    return WindowMap(base, static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_),
                     Eigen::OuterStride<>(static_cast<Eigen::Index>(stride_)));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_;
  std::size_t stride_ = 0;
  const double* source_;
  Vector padded_;
};

struct SequencePass {
  RowMatrix hidden_pre;
  RowMatrix hidden;
  Eigen::VectorXd scores;
};

void check_sequence(const PooledScorer& scorer, const EmbeddedSequence& seq) {
  if (seq.dim() != scorer.embed_dim()) {
    throw ShapeError("sequence has embedding dimension " + std::to_string(seq.dim()) +
                     ", scorer expects " + std::to_string(scorer.embed_dim()));
  }
}

SequencePass forward_windows(const MlpParams& p, const WindowMap& x) {
  const auto& s = p.spec;
  const auto in = static_cast<Eigen::Index>(s.input_dim);
  const auto hid = static_cast<Eigen::Index>(s.hidden_dim);
  const auto out = static_cast<Eigen::Index>(s.output_dim);
  ConstMatrixMap w1(p.w1.data(), hid, in);
  ConstVectorMap b1(p.b1.data(), hid);
  ConstMatrixMap w2(p.w2.data(), out, hid);
  ConstVectorMap b2(p.b2.data(), out);

  SequencePass pass;
  pass.hidden_pre.noalias() = x * w1.transpose();
  pass.hidden_pre.rowwise() += b1.transpose();
  pass.hidden = pass.hidden_pre.cwiseMax(0.0);
  RowMatrix logits = pass.hidden * w2.transpose();
  logits.rowwise() += b2.transpose();
  // Summed window by window, in index order.
  pass.scores = Eigen::VectorXd::Zero(out);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) pass.scores += logits.row(r).transpose();
  return pass;
}

void check_batch(const PooledScorer& scorer, std::span<const LabeledSequence> batch) {
  if (batch.empty()) throw EmptyData("loss over an empty batch");
  for (const auto& ex : batch) {
    check_sequence(scorer, ex.sequence);
    if (ex.label >= scorer.num_labels()) {
      throw InvalidInput("label index " + std::to_string(ex.label) + " out of range");
    }
  }
}

}  // namespace

void MlpSpec::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || output_dim == 0) {
    throw ShapeError("network dimensions must all be >= 1");
  }
}

void check_mlp_shapes(const MlpSpec& spec, std::size_t w1, std::size_t b1, std::size_t w2,
                      std::size_t b2) {
  spec.validate();
  if (w1 != spec.hidden_dim * spec.input_dim || b1 != spec.hidden_dim ||
      w2 != spec.output_dim * spec.hidden_dim || b2 != spec.output_dim) {
    throw ShapeError("parameter arrays do not match network spec " +
                     std::to_string(spec.input_dim) + "-" + std::to_string(spec.hidden_dim) + "-" +
                     std::to_string(spec.output_dim));
  }
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams p = MlpParams::zeros(spec);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Vector& w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& x : w) x = dist(rng);
  };
  fill(p.w1, spec.input_dim, spec.hidden_dim);
  fill(p.w2, spec.hidden_dim, spec.output_dim);
  return p;
}

ForwardResult mlp_forward(const MlpParams& params, std::span<const double> x) {
  check_shapes(params);
  if (x.size() != params.spec.input_dim) {
    throw ShapeError("input of dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(params.spec.input_dim));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("network input contains a non-finite value");
  }
  const auto& s = params.spec;
  ConstMatrixMap w1(params.w1.data(), static_cast<Eigen::Index>(s.hidden_dim),
                    static_cast<Eigen::Index>(s.input_dim));
  ConstMatrixMap w2(params.w2.data(), static_cast<Eigen::Index>(s.output_dim),
                    static_cast<Eigen::Index>(s.hidden_dim));
  ConstVectorMap input(x.data(), static_cast<Eigen::Index>(x.size()));

  ForwardResult result;
  result.cache.hidden_pre.resize(s.hidden_dim);
  result.cache.hidden.resize(s.hidden_dim);
  result.logits.resize(s.output_dim);
  VectorMap pre(result.cache.hidden_pre.data(), static_cast<Eigen::Index>(s.hidden_dim));
  VectorMap hidden(result.cache.hidden.data(), static_cast<Eigen::Index>(s.hidden_dim));
  VectorMap logits(result.logits.data(), static_cast<Eigen::Index>(s.output_dim));
  pre.noalias() = w1 * input + ConstVectorMap(params.b1.data(), pre.size());
  hidden = pre.cwiseMax(0.0);
  logits.noalias() = w2 * hidden + ConstVectorMap(params.b2.data(), logits.size());
  return result;
}

std::vector<Vector> windows(const EmbeddedSequence& seq, std::size_t order) {
  const WindowMatrix w(seq, order);
  const auto m = w.map();
  std::vector<Vector> out(w.rows(), Vector(w.cols()));
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      out[r][c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

PooledScorer::PooledScorer(std::size_t order, std::size_t embed_dim, MlpParams params)
    : order_(order), embed_dim_(embed_dim), params_(std::move(params)) {
  check_shapes(params_);
  if (embed_dim_ == 0) throw ShapeError("embedding dimension must be >= 1");
  if (params_.spec.input_dim != (order_ + 1) * embed_dim_) {
    throw ShapeError("network input " + std::to_string(params_.spec.input_dim) +
                     " != (order + 1) * embedding dimension = " +
                     std::to_string((order_ + 1) * embed_dim_));
  }
  if (params_.spec.output_dim < 2) throw ShapeError("a scorer needs at least 2 labels");
}

PooledScorer PooledScorer::create(std::size_t order, std::size_t embed_dim, std::size_t num_labels,
                                  std::size_t hidden_dim, std::uint64_t seed) {
  const MlpSpec spec{(order + 1) * embed_dim, hidden_dim, num_labels};
  return PooledScorer(order, embed_dim, init_params(spec, seed));
}

Vector pooled_score(const PooledScorer& scorer, const EmbeddedSequence& seq) {
  check_sequence(scorer, seq);
  const WindowMatrix w(seq, scorer.order());
  const SequencePass pass = forward_windows(scorer.params(), w.map());
  return Vector(pass.scores.begin(), pass.scores.end());
}

Prediction predict(const PooledScorer& scorer, const EmbeddedSequence& seq) {
  const Vector scores = pooled_score(scorer, seq);
  return {argmax_index(scores), softmax(scores)};
}

double batch_loss(const PooledScorer& scorer, std::span<const LabeledSequence> batch) {
  check_batch(scorer, batch);
  double loss = 0.0;
  for (const auto& ex : batch) {
    const Vector s = pooled_score(scorer, ex.sequence);
    loss += log_sum_exp(s) - s[ex.label];
  }
  return loss / static_cast<double>(batch.size());
}

LossAndGrad loss_and_grad(const PooledScorer& scorer, std::span<const LabeledSequence> batch) {
  check_batch(scorer, batch);
  const MlpParams& p = scorer.params();
  const auto& s = p.spec;
  const auto in = static_cast<Eigen::Index>(s.input_dim);
  const auto hid = static_cast<Eigen::Index>(s.hidden_dim);
  const auto out = static_cast<Eigen::Index>(s.output_dim);
  ConstMatrixMap w2(p.w2.data(), out, hid);

  LossAndGrad result{0.0, GradientSet::zeros(s)};
  MatrixMap gw1(result.grad.w1.data(), hid, in);
  VectorMap gb1(result.grad.b1.data(), hid);
  MatrixMap gw2(result.grad.w2.data(), out, hid);
  VectorMap gb2(result.grad.b2.data(), out);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const WindowMatrix windows(ex.sequence, scorer.order());
    const WindowMap x = windows.map();
    const SequencePass pass = forward_windows(p, x);

    const Vector scores(pass.scores.begin(), pass.scores.end());
    const double lse = log_sum_exp(scores);
    result.loss += (lse - scores[ex.label]) * inv_batch;

    // d loss / d S = (softmax(S) - onehot(label)) / B, shared by every window.
    Eigen::VectorXd d_scores = (pass.scores.array() - lse).exp().matrix();
    d_scores[static_cast<Eigen::Index>(ex.label)] -= 1.0;
    d_scores *= inv_batch;

    gb2 += static_cast<double>(windows.rows()) * d_scores;
    gw2.noalias() += d_scores * pass.hidden.colwise().sum();
    const Eigen::RowVectorXd d_hidden = (w2.transpose() * d_scores).transpose();
    const RowMatrix d_pre =
        (pass.hidden_pre.array() > 0.0).select(d_hidden.replicate(pass.hidden_pre.rows(), 1), 0.0);
    gb1 += d_pre.colwise().sum().transpose();
    gw1.noalias() += d_pre.transpose() * x;
  }
  return result;
}

}  // namespace nnb
