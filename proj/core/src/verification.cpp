#include "nnb/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nnb/data.hpp"
#include "nnb/tabular.hpp"

namespace nnb {
namespace {

constexpr std::size_t kLabelChoices[] = {2, 3, 4};
constexpr std::size_t kSymbolChoices[] = {2, 3, 5};

double max_abs_diff(const ProbVector& a, const ProbVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Moves mass towards label 0 in the row a discriminative classifier reads first.
PosteriorTables corrupt(const PosteriorTables& tables, std::span<const std::size_t> y, int order) {
  const std::size_t n = tables.num_labels();
  const std::size_t m = tables.num_symbols();
  Vector l1 = tables.l1_data(), l2 = tables.l2_data(), l3 = tables.l3_data();
  Vector* table = &l1;
  std::size_t row = y[0];
  if (order == 1) {
    table = &l2;
    row = y[0] * m + y[1];
  } else if (order == 2) {
    table = &l3;
    row = (y[0] * m + y[1]) * m + y[2];
  }
  std::span<double> r(table->data() + row * n, n);
  r[0] += 0.5;
  for (double& v : r) v /= 1.5;
  return PosteriorTables(n, m, std::move(l1), std::move(l2), std::move(l3));
}

struct Trial {
  std::size_t labels;
  std::size_t symbols;
  std::vector<std::size_t> sequence;
};

Trial draw_trial(std::mt19937_64& rng, std::size_t min_length) {
  std::uniform_int_distribution<std::size_t> pick(0, 2);
  std::uniform_int_distribution<std::size_t> length(min_length, 6);
  Trial t{kLabelChoices[pick(rng)], kSymbolChoices[pick(rng)], {}};
  t.sequence.resize(length(rng));
  std::uniform_int_distribution<std::size_t> symbol(0, t.symbols - 1);
  for (auto& s : t.sequence) s = symbol(rng);
  return t;
}

}  // namespace

bool EquivalenceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [this](const EquivalenceCheck& c) {
    return c.failing_seeds.empty() && c.max_deviation < tolerance;
  });
}

EquivalenceReport verify_discriminative_forms(const EquivalenceOptions& options) {
  EquivalenceReport report;
  report.tolerance = options.tolerance;
  EquivalenceCheck nb{"naive-bayes discriminative vs generative", 0, 0.0, {}};
  EquivalenceCheck mc{"pooled-mc vs joint-law enumeration", 0, 0.0, {}};
  EquivalenceCheck mc2{"pooled-mc2 vs joint-law enumeration", 0, 0.0, {}};

  auto record = [&](EquivalenceCheck& check, double deviation, std::uint64_t seed) {
    ++check.trials;
    check.max_deviation = std::max(check.max_deviation, deviation);
    if (!(deviation < options.tolerance)) check.failing_seeds.push_back(seed);
  };

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const std::uint64_t seed = options.seed + trial;
    std::mt19937_64 rng(seed);

    {
      const Trial t = draw_trial(rng, 1);
      const PooledJointSpec spec = random_joint_spec(0, t.labels, t.symbols, rng());
      std::vector<ProbVector> emission(spec.initial_rows());
      const TabularNB model(spec.prior(), std::move(emission));
      PosteriorTables tables = derive_posteriors_from_joint(to_joint_spec(model));
      if (options.corrupt_tables) tables = corrupt(tables, t.sequence, 0);
      record(nb,
             max_abs_diff(nb_posterior_discriminative(model.prior(), tables, t.sequence),
                          nb_posterior_generative(model, t.sequence)),
             seed);
    }
    {
      const Trial t = draw_trial(rng, 2);
      const PooledJointSpec spec = random_joint_spec(1, t.labels, t.symbols, rng());
      PosteriorTables tables = derive_posteriors_from_joint(spec);
      if (options.corrupt_tables) tables = corrupt(tables, t.sequence, 1);
      record(mc, max_abs_diff(pooledmc_posterior(tables, t.sequence), joint_oracle(spec, t.sequence)), seed);
    }
    {
      const Trial t = draw_trial(rng, 3);
      const PooledJointSpec spec = random_joint_spec(2, t.labels, t.symbols, rng());
      PosteriorTables tables = derive_posteriors_from_joint(spec);
      if (options.corrupt_tables) tables = corrupt(tables, t.sequence, 2);
      record(mc2, max_abs_diff(pooledmc2_posterior(tables, t.sequence), joint_oracle(spec, t.sequence)), seed);
    }
  }
  report.checks = {std::move(nb), std::move(mc), std::move(mc2)};
  return report;
}

}  // namespace nnb
