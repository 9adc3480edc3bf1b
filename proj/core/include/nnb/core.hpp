#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nnb {

using Vector = std::vector<double>;

/// Tolerance on the total mass of a probability vector.
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// The finite set of class labels, in a fixed order. Index i is lambda_{i+1}.
class LabelSet {
 public:
  explicit LabelSet(std::vector<std::string> names);

  /// Labels "0", "1", ..., "n-1".
  static LabelSet numbered(std::size_t n);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t index) const;
  /// Throws InvalidInput for names outside the set.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const LabelSet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A length-T sequence of d-dimensional observations stored row-major.
class EmbeddedSequence {
 public:
  /// Throws ShapeError on ragged or empty input, InvalidInput on NaN/inf.
  explicit EmbeddedSequence(const std::vector<Vector>& rows);
  EmbeddedSequence(std::size_t length, std::size_t dim, Vector data);

  static EmbeddedSequence zeros(std::size_t length, std::size_t dim);

  std::size_t length() const noexcept { return length_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t t) const;
  /// All T*d values, row after row.
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const EmbeddedSequence&) const = default;

 private:
  std::size_t length_ = 0;
  std::size_t dim_ = 0;
  Vector data_;
};

struct LabeledSequence {
  EmbeddedSequence sequence;
  std::size_t label = 0;
};

/// A sequence over a finite alphabet, symbols given by index.
struct DiscreteExample {
  std::vector<std::size_t> symbols;
  std::size_t label = 0;
};

/// Nonnegative values summing to one.
class ProbVector {
 public:
  ProbVector() = default;
  /// Validates nonnegativity and unit mass within kProbabilitySumTolerance.
  explicit ProbVector(Vector values);

  static ProbVector uniform(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const Vector& values() const& noexcept { return values_; }
  Vector values() && noexcept { return std::move(values_); }
  std::span<const double> span() const noexcept { return values_; }

 private:
  Vector values_;
};

/// v_i / sum_j v_j. Throws DegenerateDistribution unless v >= 0 with some v_i > 0.
ProbVector norm(std::span<const double> v);

/// exp(v_i) / sum_j exp(v_j), evaluated after subtracting max(v).
ProbVector softmax(std::span<const double> v);

/// log sum_j exp(v_j), stable for large magnitudes.
double log_sum_exp(std::span<const double> v);

/// Index of the largest score, smallest index on ties.
std::size_t argmax_index(std::span<const double> scores);

/// argmax_index with a length check against the label set.
std::size_t argmax_label(std::span<const double> scores, const LabelSet& labels);

/// A decoded label together with the posterior it was read from.
struct Prediction {
  std::size_t label = 0;
  ProbVector posterior;
};

}  // namespace nnb
