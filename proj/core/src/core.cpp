#include "nnb/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nnb/errors.hpp"

namespace nnb {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw InvalidInput("a label set needs at least 2 labels, got " + std::to_string(names_.size()));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw InvalidInput("duplicate label '" + names_[i] + "'");
    }
  }
}

LabelSet LabelSet::numbered(std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return LabelSet(std::move(names));
}

const std::string& LabelSet::name(std::size_t index) const {
  if (index >= names_.size()) {
    throw InvalidInput("label index " + std::to_string(index) + " out of range");
  }
  return names_[index];
}

std::size_t LabelSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw InvalidInput("unknown label '" + std::string(name) + "'");
  return it->second;
}

bool LabelSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

EmbeddedSequence::EmbeddedSequence(const std::vector<Vector>& rows) {
  if (rows.empty()) throw ShapeError("sequence must contain at least one vector");
  dim_ = rows.front().size();
  if (dim_ == 0) throw ShapeError("observation vectors must have dimension >= 1");
  length_ = rows.size();
  data_.reserve(length_ * dim_);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != dim_) {
      throw ShapeError("vector " + std::to_string(t) + " has dimension " +
                       std::to_string(rows[t].size()) + ", expected " + std::to_string(dim_));
    }
    data_.insert(data_.end(), rows[t].begin(), rows[t].end());
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw InvalidInput("sequence contains a non-finite value");
  }
}

EmbeddedSequence::EmbeddedSequence(std::size_t length, std::size_t dim, Vector data)
    : length_(length), dim_(dim), data_(std::move(data)) {
  if (length_ == 0 || dim_ == 0) throw ShapeError("sequence needs T >= 1 and d >= 1");
  if (data_.size() != length_ * dim_) {
    throw ShapeError("sequence buffer holds " + std::to_string(data_.size()) +
                     " values, expected T*d = " + std::to_string(length_ * dim_));
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw InvalidInput("sequence contains a non-finite value");
  }
}

EmbeddedSequence EmbeddedSequence::zeros(std::size_t length, std::size_t dim) {
  return EmbeddedSequence(length, dim, Vector(length * dim, 0.0));
}

std::span<const double> EmbeddedSequence::row(std::size_t t) const {
  if (t >= length_) throw ShapeError("row index out of range");
  return std::span<const double>(data_).subspan(t * dim_, dim_);
}

ProbVector::ProbVector(Vector values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("probability vector must be non-empty");
  double total = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInput("probability entries must be finite and nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw InvalidInput("probability vector sums to " + std::to_string(total));
  }
}

ProbVector ProbVector::uniform(std::size_t n) {
  if (n == 0) throw InvalidInput("uniform distribution over an empty set");
  return ProbVector(Vector(n, 1.0 / static_cast<double>(n)));
}

ProbVector norm(std::span<const double> v) {
  if (v.empty()) throw DegenerateDistribution("empty vector");
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw DegenerateDistribution("entries must be finite and nonnegative");
    }
    total += x;
  }
  if (!(total > 0.0)) throw DegenerateDistribution("all entries are zero");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= total;
  return ProbVector(std::move(out));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("log_sum_exp of an empty vector");
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) throw InvalidInput("log_sum_exp of a non-finite vector");
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

ProbVector softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("softmax of an empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput("softmax input contains a non-finite entry");
  }
  const double hi = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - hi);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return ProbVector(std::move(out));
}

std::size_t argmax_index(std::span<const double> scores) {
  if (scores.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t argmax_label(std::span<const double> scores, const LabelSet& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("got " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  }
  return argmax_index(scores);
}

}  // namespace nnb
