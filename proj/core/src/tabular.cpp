#include "nnb/tabular.hpp"

#include <cmath>
#include <limits>

#include "nnb/errors.hpp"

namespace nnb {
namespace {

void check_symbols(std::span<const std::size_t> y, std::size_t alphabet_size) {
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] >= alphabet_size) {
      throw UnknownSymbol("symbol index " + std::to_string(y[t]) + " at position " +
                          std::to_string(t) + " outside alphabet of size " +
                          std::to_string(alphabet_size));
    }
  }
}

void require_length(std::span<const std::size_t> y, std::size_t minimum, const char* model) {
  if (y.size() < minimum) {
    throw SequenceTooShort(std::string(model) + " needs T >= " + std::to_string(minimum) +
                           ", got T = " + std::to_string(y.size()));
  }
}

double checked_log(double p, const char* what) {
  if (!(p > 0.0)) throw StrictPositivityViolation(std::string(what) + " has a zero entry");
  return std::log(p);
}

// Normalizes exp(scores) where some scores may be -inf.
ProbVector normalize_log_scores(const Vector& scores) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) hi = std::max(hi, s);
  if (!std::isfinite(hi)) throw DegenerateDistribution("every class has zero probability");
  Vector weights(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) weights[i] = std::exp(scores[i] - hi);
  return norm(weights);
}

void check_rows(const std::vector<ProbVector>& rows, std::size_t count, std::size_t width,
                const char* what) {
  if (rows.size() != count) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(count) + " rows, got " +
                     std::to_string(rows.size()));
  }
  for (const auto& row : rows) {
    if (row.size() != width) {
      throw ShapeError(std::string(what) + ": row of width " + std::to_string(row.size()) +
                       ", expected " + std::to_string(width));
    }
  }
}

bool all_positive(const std::vector<ProbVector>& rows) {
  for (const auto& row : rows) {
    for (double v : row.values()) {
      if (!(v > 0.0)) return false;
    }
  }
  return true;
}

void check_table(const Vector& table, std::size_t rows, std::size_t n, const char* what) {
  if (table.size() != rows * n) {
    throw ShapeError(std::string(what) + " holds " + std::to_string(table.size()) +
                     " values, expected " + std::to_string(rows * n));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = table[r * n + i];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidInput(std::string(what) + " has a negative or non-finite entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      throw InvalidInput(std::string(what) + " row " + std::to_string(r) + " sums to " +
                         std::to_string(total));
    }
  }
}

}  // namespace

DiscreteAlphabet::DiscreteAlphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw InvalidInput("alphabet must contain at least one symbol");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], i).second) {
      throw InvalidInput("duplicate symbol '" + symbols_[i] + "'");
    }
  }
}

DiscreteAlphabet DiscreteAlphabet::numbered(std::size_t m) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < m; ++i) symbols.push_back(std::to_string(i));
  return DiscreteAlphabet(std::move(symbols));
}

const std::string& DiscreteAlphabet::symbol(std::size_t index) const {
  if (index >= symbols_.size()) throw UnknownSymbol("symbol index " + std::to_string(index));
  return symbols_[index];
}

std::size_t DiscreteAlphabet::index_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) throw UnknownSymbol("'" + std::string(symbol) + "'");
  return it->second;
}

std::vector<std::size_t> DiscreteAlphabet::encode(const std::vector<std::string>& symbols) const {
  std::vector<std::size_t> out;
  out.reserve(symbols.size());
  for (const auto& s : symbols) out.push_back(index_of(s));
  return out;
}

TabularNB::TabularNB(ProbVector prior, std::vector<ProbVector> emission)
    : prior_(std::move(prior)), emission_(std::move(emission)) {
  if (prior_.size() < 2) throw InvalidInput("naive Bayes needs at least 2 labels");
  if (emission_.empty()) throw ShapeError("missing emission rows");
  check_rows(emission_, prior_.size(), emission_.front().size(), "emission");
}

PooledJointSpec::PooledJointSpec(int order, ProbVector prior, std::vector<ProbVector> initial,
                                 std::vector<ProbVector> transition,
                                 std::vector<ProbVector> transition2)
    : order_(order),
      prior_(std::move(prior)),
      num_symbols_(initial.empty() ? 0 : initial.front().size()),
      initial_(std::move(initial)),
      transition_(std::move(transition)),
      transition2_(std::move(transition2)) {
  if (order_ < 0 || order_ > 2) throw InvalidInput("pooled chain order must be 0, 1 or 2");
  if (prior_.size() < 2) throw InvalidInput("joint spec needs at least 2 labels");
  if (num_symbols_ == 0) throw ShapeError("missing initial emission rows");
  const std::size_t n = prior_.size();
  const std::size_t m = num_symbols_;
  check_rows(initial_, n, m, "initial");
  if (order_ >= 1) {
    check_rows(transition_, n * m, m, "transition");
  } else if (!transition_.empty()) {
    throw ShapeError("order-0 spec must not carry transition rows");
  }
  if (order_ == 2) {
    check_rows(transition2_, n * m * m, m, "second-order transition");
  } else if (!transition2_.empty()) {
    throw ShapeError("second-order transition rows need order 2");
  }
}

double PooledJointSpec::second(std::size_t i, std::size_t a, std::size_t b) const {
  if (order_ == 0) return initial_[i][b];
  return transition_[i * num_symbols_ + a][b];
}

double PooledJointSpec::step(std::size_t i, std::size_t a, std::size_t b, std::size_t c) const {
  switch (order_) {
    case 0:
      return initial_[i][c];
    case 1:
      return transition_[i * num_symbols_ + b][c];
    default:
      return transition2_[(i * num_symbols_ + a) * num_symbols_ + b][c];
  }
}

bool PooledJointSpec::strictly_positive() const {
  for (double v : prior_.values()) {
    if (!(v > 0.0)) return false;
  }
  return all_positive(initial_) && all_positive(transition_) && all_positive(transition2_);
}

PooledJointSpec to_joint_spec(const TabularNB& model) {
  std::vector<ProbVector> rows;
  for (std::size_t i = 0; i < model.num_labels(); ++i) rows.push_back(model.emission(i));
  return PooledJointSpec(0, model.prior(), std::move(rows));
}

PosteriorTables::PosteriorTables(std::size_t num_labels, std::size_t num_symbols, Vector l1,
                                 Vector l2, Vector l3)
    : num_labels_(num_labels),
      num_symbols_(num_symbols),
      l1_(std::move(l1)),
      l2_(std::move(l2)),
      l3_(std::move(l3)) {
  if (num_labels_ < 2 || num_symbols_ < 1) throw InvalidInput("posterior tables need N >= 2, M >= 1");
  const std::size_t m = num_symbols_;
  check_table(l1_, m, num_labels_, "L1");
  check_table(l2_, m * m, num_labels_, "L2");
  check_table(l3_, m * m * m, num_labels_, "L3");
}

std::span<const double> PosteriorTables::l1(std::size_t a) const {
  return std::span<const double>(l1_).subspan(a * num_labels_, num_labels_);
}

std::span<const double> PosteriorTables::l2(std::size_t a, std::size_t b) const {
  return std::span<const double>(l2_).subspan((a * num_symbols_ + b) * num_labels_, num_labels_);
}

std::span<const double> PosteriorTables::l3(std::size_t a, std::size_t b, std::size_t c) const {
  const std::size_t m = num_symbols_;
  return std::span<const double>(l3_).subspan(((a * m + b) * m + c) * num_labels_, num_labels_);
}

TabularNB fit_tabular_nb(std::span<const DiscreteExample> data, const DiscreteAlphabet& alphabet,
                         const LabelSet& labels) {
  if (data.empty()) throw EmptyData("cannot fit naive Bayes on an empty dataset");
  const std::size_t n = labels.size();
  const std::size_t m = alphabet.size();
  std::vector<double> class_counts(n, 0.0);
  std::vector<double> token_counts(n * m, 0.0);
  std::vector<double> class_tokens(n, 0.0);
  for (const auto& ex : data) {
    if (ex.label >= n) throw InvalidInput("label index " + std::to_string(ex.label) + " out of range");
    check_symbols(ex.symbols, m);
    class_counts[ex.label] += 1.0;
    for (std::size_t s : ex.symbols) {
      token_counts[ex.label * m + s] += 1.0;
      class_tokens[ex.label] += 1.0;
    }
  }
  const double total = static_cast<double>(data.size());
  Vector prior(n);
  for (std::size_t i = 0; i < n; ++i) prior[i] = class_counts[i] / total;
  std::vector<ProbVector> emission;
  emission.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector row(m);
    const double denom = class_tokens[i] + static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) row[s] = (token_counts[i * m + s] + 1.0) / denom;
    emission.push_back(norm(row));
  }
  return TabularNB(norm(prior), std::move(emission));
}

ProbVector nb_posterior_generative(const TabularNB& model, std::span<const std::size_t> y) {
  require_length(y, 1, "naive Bayes");
  check_symbols(y, model.num_symbols());
  Vector scores(model.num_labels());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double s = std::log(model.prior()[i]);
    const ProbVector& b = model.emission(i);
    for (std::size_t sym : y) s += std::log(b[sym]);
    scores[i] = s;
  }
  return normalize_log_scores(scores);
}

PosteriorTables derive_posteriors_from_joint(const PooledJointSpec& spec) {
  if (!spec.strictly_positive()) {
    throw StrictPositivityViolation("joint spec must be strictly positive to derive window posteriors");
  }
  const std::size_t n = spec.num_labels();
  const std::size_t m = spec.num_symbols();
  Vector l1(m * n), l2(m * m * n), l3(m * m * m * n);
  Vector joint(n);

  auto store = [&](Vector& table, std::size_t row) {
    const ProbVector p = norm(joint);
    std::copy(p.values().begin(), p.values().end(), table.begin() + static_cast<std::ptrdiff_t>(row * n));
  };

  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) joint[i] = spec.prior()[i] * spec.first(i, a);
    store(l1, a);
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        joint[i] = spec.prior()[i] * spec.first(i, a) * spec.second(i, a, b);
      }
      store(l2, a * m + b);
      for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
          joint[i] = spec.prior()[i] * spec.first(i, a) * spec.second(i, a, b) * spec.step(i, a, b, c);
        }
        store(l3, (a * m + b) * m + c);
      }
    }
  }
  return PosteriorTables(n, m, std::move(l1), std::move(l2), std::move(l3));
}

ProbVector nb_posterior_discriminative(const ProbVector& prior, const PosteriorTables& tables,
                                       std::span<const std::size_t> y) {
  require_length(y, 1, "naive Bayes");
  check_symbols(y, tables.num_symbols());
  const std::size_t n = tables.num_labels();
  if (prior.size() != n) throw ShapeError("prior and tables disagree on the number of labels");
  const double exponent = 1.0 - static_cast<double>(y.size());
  Vector scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = exponent * checked_log(prior[i], "prior");
  for (std::size_t sym : y) {
    const auto row = tables.l1(sym);
    for (std::size_t i = 0; i < n; ++i) scores[i] += checked_log(row[i], "L1");
  }
  return softmax(scores);
}

ProbVector pooledmc_posterior(const PosteriorTables& tables, std::span<const std::size_t> y) {
  require_length(y, 2, "pooled Markov chain");
  check_symbols(y, tables.num_symbols());
  const std::size_t n = tables.num_labels();
  Vector scores(n);
  {
    const auto first = tables.l1(y[0]);
    for (std::size_t i = 0; i < n; ++i) scores[i] = checked_log(first[i], "L1");
  }
  for (std::size_t t = 0; t + 1 < y.size(); ++t) {
    const auto pair = tables.l2(y[t], y[t + 1]);
    const auto single = tables.l1(y[t]);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += checked_log(pair[i], "L2") - checked_log(single[i], "L1");
    }
  }
  return softmax(scores);
}

ProbVector pooledmc2_posterior(const PosteriorTables& tables, std::span<const std::size_t> y) {
  require_length(y, 3, "order-2 pooled Markov chain");
  check_symbols(y, tables.num_symbols());
  const std::size_t n = tables.num_labels();
  Vector scores(n);
  {
    const auto first = tables.l2(y[0], y[1]);
    for (std::size_t i = 0; i < n; ++i) scores[i] = checked_log(first[i], "L2");
  }
  for (std::size_t t = 0; t + 2 < y.size(); ++t) {
    const auto triple = tables.l3(y[t], y[t + 1], y[t + 2]);
    const auto pair = tables.l2(y[t], y[t + 1]);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += checked_log(triple[i], "L3") - checked_log(pair[i], "L2");
    }
  }
  return softmax(scores);
}

double joint_probability(const PooledJointSpec& spec, std::size_t label, std::span<const std::size_t> y) {
  require_length(y, 1, "joint law");
  check_symbols(y, spec.num_symbols());
  if (label >= spec.num_labels()) throw InvalidInput("label index out of range");
  double p = spec.prior()[label] * spec.first(label, y[0]);
  if (y.size() >= 2) p *= spec.second(label, y[0], y[1]);
  for (std::size_t t = 2; t < y.size(); ++t) p *= spec.step(label, y[t - 2], y[t - 1], y[t]);
  return p;
}

ProbVector joint_oracle(const PooledJointSpec& spec, std::span<const std::size_t> y) {
  Vector joint(spec.num_labels());
  for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = joint_probability(spec, i, y);
  return norm(joint);
}

}  // namespace nnb
