#pragma once

// Exact classifiers over a finite observation alphabet.
//
// A discrete sequence is a list of symbol indices into a DiscreteAlphabet.
// Three families of models are covered, all stationary:
//
//   order 0  naive Bayes         p(x) p(y1|x) prod_t p(y_t|x)
//   order 1  pooled Markov chain p(x) p(y1|x) prod_t p(y_{t+1}|x, y_t)
//   order 2  pooled chain, 2nd   p(x) p(y1|x) p(y2|x,y1) prod_t p(y_{t+2}|x, y_t, y_{t+1})
//
// The discriminative classifiers only read window posteriors p(x | window)
// (PosteriorTables). joint_oracle() evaluates the factorized joint law
// literally and is the reference the discriminative forms are checked against.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nnb/core.hpp"

namespace nnb {

class DiscreteAlphabet {
 public:
  explicit DiscreteAlphabet(std::vector<std::string> symbols);
  /// Symbols "0" .. "m-1".
  static DiscreteAlphabet numbered(std::size_t m);

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::string& symbol(std::size_t index) const;
  /// Throws UnknownSymbol.
  std::size_t index_of(std::string_view symbol) const;
  std::vector<std::size_t> encode(const std::vector<std::string>& symbols) const;
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Prior pi(i) = p(X = i) and emissions b_i(y) = p(Y_t = y | X = i).
class TabularNB {
 public:
  TabularNB(ProbVector prior, std::vector<ProbVector> emission);

  std::size_t num_labels() const noexcept { return prior_.size(); }
  std::size_t num_symbols() const noexcept { return emission_.front().size(); }
  const ProbVector& prior() const noexcept { return prior_; }
  const ProbVector& emission(std::size_t label) const { return emission_.at(label); }

 private:
  ProbVector prior_;
  std::vector<ProbVector> emission_;
};

/// Parameters of a pooled Markov chain of order 0, 1 or 2.
///
/// `initial` has one row per label (p(Y_1 | X = i)). `transition` has one
/// row per (label, previous symbol), index i*M + a, holding p(Y_{t+1} | X = i, Y_t = a);
/// it is required for orders 1 and 2 (for order 2 it drives p(Y_2 | X, Y_1)).
/// `transition2` has one row per (i, a, b), index (i*M + a)*M + b, holding
/// p(Y_{t+2} | X = i, Y_t = a, Y_{t+1} = b); order 2 only.
///
/// Rows must be distributions. Strict positivity is not required here
/// (degenerate priors are useful for sampling) but the table derivation checks it.
class PooledJointSpec {
 public:
  PooledJointSpec(int order, ProbVector prior, std::vector<ProbVector> initial,
                  std::vector<ProbVector> transition = {},
                  std::vector<ProbVector> transition2 = {});

  int order() const noexcept { return order_; }
  std::size_t num_labels() const noexcept { return prior_.size(); }
  std::size_t num_symbols() const noexcept { return num_symbols_; }
  const ProbVector& prior() const noexcept { return prior_; }

  /// p(Y_1 = a | X = i)
  double first(std::size_t i, std::size_t a) const { return initial_[i][a]; }
  /// p(Y_2 = b | X = i, Y_1 = a)
  double second(std::size_t i, std::size_t a, std::size_t b) const;
  /// p(Y_{t+2} = c | X = i, Y_t = a, Y_{t+1} = b) for t >= 1
  double step(std::size_t i, std::size_t a, std::size_t b, std::size_t c) const;

  /// The conditional distribution rows, in the layouts documented above.
  const std::vector<ProbVector>& initial_rows() const noexcept { return initial_; }
  const std::vector<ProbVector>& transition_rows() const noexcept { return transition_; }
  const std::vector<ProbVector>& transition2_rows() const noexcept { return transition2_; }

  bool strictly_positive() const;

 private:
  int order_;
  ProbVector prior_;
  std::size_t num_symbols_;
  std::vector<ProbVector> initial_;
  std::vector<ProbVector> transition_;
  std::vector<ProbVector> transition2_;
};

/// The naive Bayes model viewed as an order-0 pooled chain.
PooledJointSpec to_joint_spec(const TabularNB& model);

/// Window posteriors of a stationary model, flat row-major, one row of N per window:
///   l1(a)       = p(X | Y_t = a)
///   l2(a, b)    = p(X | Y_t = a, Y_{t+1} = b)
///   l3(a, b, c) = p(X | Y_t = a, Y_{t+1} = b, Y_{t+2} = c)
class PosteriorTables {
 public:
  PosteriorTables(std::size_t num_labels, std::size_t num_symbols, Vector l1, Vector l2, Vector l3);

  std::size_t num_labels() const noexcept { return num_labels_; }
  std::size_t num_symbols() const noexcept { return num_symbols_; }

  std::span<const double> l1(std::size_t a) const;
  std::span<const double> l2(std::size_t a, std::size_t b) const;
  std::span<const double> l3(std::size_t a, std::size_t b, std::size_t c) const;

  const Vector& l1_data() const noexcept { return l1_; }
  const Vector& l2_data() const noexcept { return l2_; }
  const Vector& l3_data() const noexcept { return l3_; }

 private:
  std::size_t num_labels_;
  std::size_t num_symbols_;
  Vector l1_, l2_, l3_;
};

/// Maximum-likelihood prior; emissions with add-one smoothing.
TabularNB fit_tabular_nb(std::span<const DiscreteExample> data, const DiscreteAlphabet& alphabet,
                         const LabelSet& labels);

/// Posterior of the generative naive Bayes classifier, in log space.
ProbVector nb_posterior_generative(const TabularNB& model, std::span<const std::size_t> y);

/// Exact window posteriors implied by the joint law. The window marginals are
/// those of (X, Y_1), (X, Y_1, Y_2) and (X, Y_1, Y_2, Y_3); the discriminative
/// products only use ratios in which the time-dependent factors cancel, so
/// these tables are exact for every t even when the chain is not started at
/// its stationary distribution.
PosteriorTables derive_posteriors_from_joint(const PooledJointSpec& spec);

/// norm_i( pi(i)^{1-T} prod_t l1(y_t)(i) ).
ProbVector nb_posterior_discriminative(const ProbVector& prior, const PosteriorTables& tables,
                                       std::span<const std::size_t> y);

/// norm_i( l1(y_1)(i) prod_{t<T} l2(y_t, y_{t+1})(i) / l1(y_t)(i) ). Needs T >= 2.
ProbVector pooledmc_posterior(const PosteriorTables& tables, std::span<const std::size_t> y);

/// norm_i( l2(y_1, y_2)(i) prod_{t<=T-2} l3(y_t..y_{t+2})(i) / l2(y_t, y_{t+1})(i) ). Needs T >= 3.
ProbVector pooledmc2_posterior(const PosteriorTables& tables, std::span<const std::size_t> y);

/// p(X = label, y_{1:T}), the literal product of the factorization.
double joint_probability(const PooledJointSpec& spec, std::size_t label, std::span<const std::size_t> y);

/// Posterior by Bayes rule over the literal joint law.
ProbVector joint_oracle(const PooledJointSpec& spec, std::span<const std::size_t> y);

}  // namespace nnb
