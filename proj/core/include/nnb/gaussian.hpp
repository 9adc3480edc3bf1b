#pragma once

#include <span>

#include "nnb/core.hpp"

namespace nnb {

/// Lower bound applied to every per-class standard deviation.
inline constexpr double kSigmaFloor = 1e-6;

/// Generative naive Bayes over scalar word observations: each word vector is
/// reduced to the mean of its components and modelled by N(mu_i, sigma_i).
class GaussianNB {
 public:
  GaussianNB(ProbVector prior, Vector mean, Vector sigma);

  std::size_t num_labels() const noexcept { return prior_.size(); }
  const ProbVector& prior() const noexcept { return prior_; }
  const Vector& mean() const noexcept { return mean_; }
  const Vector& sigma() const noexcept { return sigma_; }

 private:
  ProbVector prior_;
  Vector mean_;
  Vector sigma_;
};

/// Arithmetic mean of the components.
double reduce_word(std::span<const double> v);

/// Prior from document frequencies; per-class mean and population standard
/// deviation of the reduced values of every token of the class's documents.
GaussianNB fit_gaussian_nb(std::span<const LabeledSequence> data, const LabelSet& labels);

Prediction gaussian_nb_predict(const GaussianNB& model, const EmbeddedSequence& seq);

}  // namespace nnb
