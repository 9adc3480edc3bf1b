#include "nnb/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "nnb/errors.hpp"

namespace nnb {

GaussianNB::GaussianNB(ProbVector prior, Vector mean, Vector sigma)
    : prior_(std::move(prior)), mean_(std::move(mean)), sigma_(std::move(sigma)) {
  const std::size_t n = prior_.size();
  if (n < 2) throw InvalidInput("Gaussian naive Bayes needs at least 2 labels");
  if (mean_.size() != n || sigma_.size() != n) {
    throw ShapeError("prior, mean and sigma must all have one entry per label");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(mean_[i]) || !std::isfinite(sigma_[i])) {
      throw InvalidInput("non-finite Gaussian parameter");
    }
    if (sigma_[i] < kSigmaFloor) {
      throw InvalidInput("sigma " + std::to_string(sigma_[i]) + " below the floor");
    }
  }
}

double reduce_word(std::span<const double> v) {
  if (v.empty()) throw ShapeError("cannot reduce an empty vector");
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

GaussianNB fit_gaussian_nb(std::span<const LabeledSequence> data, const LabelSet& labels) {
  if (data.empty()) throw EmptyData("cannot fit Gaussian naive Bayes on an empty dataset");
  const std::size_t n = labels.size();
  std::vector<double> docs(n, 0.0);
  // Welford accumulators per class.
  std::vector<double> count(n, 0.0), mean(n, 0.0), m2(n, 0.0);
  for (const auto& ex : data) {
    if (ex.label >= n) throw InvalidInput("label index " + std::to_string(ex.label) + " out of range");
    docs[ex.label] += 1.0;
    for (std::size_t t = 0; t < ex.sequence.length(); ++t) {
      const double x = reduce_word(ex.sequence.row(t));
      const std::size_t i = ex.label;
      count[i] += 1.0;
      const double delta = x - mean[i];
      mean[i] += delta / count[i];
      m2[i] += delta * (x - mean[i]);
    }
  }
  Vector prior(n), sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0.0) throw EmptyClass("label '" + labels.name(i) + "' has no tokens");
    prior[i] = docs[i] / static_cast<double>(data.size());
    sigma[i] = std::max(std::sqrt(m2[i] / count[i]), kSigmaFloor);
  }
  return GaussianNB(norm(prior), std::move(mean), std::move(sigma));
}

Prediction gaussian_nb_predict(const GaussianNB& model, const EmbeddedSequence& seq) {
  const std::size_t n = model.num_labels();
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Vector scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = model.prior()[i];
    scores[i] = p > 0.0 ? std::log(p) : -1e300;
  }
  for (std::size_t t = 0; t < seq.length(); ++t) {
    const double x = reduce_word(seq.row(t));
    for (std::size_t i = 0; i < n; ++i) {
      const double sigma = model.sigma()[i];
      const double z = (x - model.mean()[i]) / sigma;
      scores[i] += -half_log_two_pi - std::log(sigma) - 0.5 * z * z;
    }
  }
  ProbVector posterior = softmax(scores);
  return {argmax_index(scores), std::move(posterior)};
}

}  // namespace nnb
