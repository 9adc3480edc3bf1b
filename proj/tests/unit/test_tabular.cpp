#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "nnb/data.hpp"
#include "nnb/errors.hpp"
#include "nnb/tabular.hpp"
#include "test_support.hpp"

using namespace nnb;
using nnb::testing::max_abs_diff;
using nnb::testing::random_symbols;

namespace {

PooledJointSpec hand_order1_spec() {
  // pi = [0.4, 0.6]; p(Y1|X); p(Y_{t+1}|X, Y_t) rows indexed i*M + a.
  return PooledJointSpec(1, ProbVector({0.4, 0.6}), {ProbVector({0.7, 0.3}), ProbVector({0.2, 0.8})},
                         {ProbVector({0.9, 0.1}), ProbVector({0.5, 0.5}), ProbVector({0.3, 0.7}),
                          ProbVector({0.6, 0.4})});
}

// Uniform tables of the given shape.
PosteriorTables uniform_tables(std::size_t n, std::size_t m) {
  const double u = 1.0 / static_cast<double>(n);
  return PosteriorTables(n, m, Vector(m * n, u), Vector(m * m * n, u), Vector(m * m * m * n, u));
}

// The spec with label i renamed to perm[i].
PooledJointSpec permute_labels(const PooledJointSpec& spec, const std::vector<std::size_t>& perm) {
  const std::size_t n = spec.num_labels(), m = spec.num_symbols();
  Vector prior(n);
  std::vector<ProbVector> initial(n, ProbVector::uniform(m));
  std::vector<ProbVector> t1(spec.transition_rows().size(), ProbVector::uniform(m));
  std::vector<ProbVector> t2(spec.transition2_rows().size(), ProbVector::uniform(m));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = perm[i];
    prior[j] = spec.prior()[i];
    initial[j] = spec.initial_rows()[i];
    for (std::size_t a = 0; a < m && !t1.empty(); ++a) t1[j * m + a] = spec.transition_rows()[i * m + a];
    for (std::size_t ab = 0; ab < m * m && !t2.empty(); ++ab) {
      t2[j * m * m + ab] = spec.transition2_rows()[i * m * m + ab];
    }
  }
  return PooledJointSpec(spec.order(), ProbVector(prior), initial, t1, t2);
}

// Brute-force marginal p(X = i, Y_1 = a, Y_2 = b) obtained by summing the
// literal joint law of length-4 sequences over Y_3 and Y_4.
double brute_marginal(const PooledJointSpec& spec, std::size_t i, std::size_t a, std::size_t b) {
  const std::size_t m = spec.num_symbols();
  double total = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t d = 0; d < m; ++d) {
      const std::vector<std::size_t> y{a, b, c, d};
      total += joint_probability(spec, i, y);
    }
  }
  return total;
}

// Straight products (no logarithms) of the three discriminative forms.
Vector direct_nb(const ProbVector& pi, const PosteriorTables& t, const std::vector<std::size_t>& y) {
  Vector v(pi.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::pow(pi[i], 1.0 - static_cast<double>(y.size()));
    for (auto s : y) v[i] *= t.l1(s)[i];
  }
  return norm(v).values();
}

Vector direct_mc(const PosteriorTables& t, const std::vector<std::size_t>& y) {
  Vector v(t.num_labels());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = t.l1(y[0])[i];
    for (std::size_t k = 0; k + 1 < y.size(); ++k) v[i] *= t.l2(y[k], y[k + 1])[i] / t.l1(y[k])[i];
  }
  return norm(v).values();
}

Vector direct_mc2(const PosteriorTables& t, const std::vector<std::size_t>& y) {
  Vector v(t.num_labels());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = t.l2(y[0], y[1])[i];
    for (std::size_t k = 0; k + 2 < y.size(); ++k) {
      v[i] *= t.l3(y[k], y[k + 1], y[k + 2])[i] / t.l2(y[k], y[k + 1])[i];
    }
  }
  return norm(v).values();
}

}  // namespace

TEST_CASE("fit_tabular_nb") {
  const auto alphabet = DiscreteAlphabet::numbered(2);
  const auto labels = LabelSet::numbered(2);

  SUBCASE("prior from document counts") {
    const std::vector<DiscreteExample> data{{{0}, 0}, {{1}, 0}, {{0, 1}, 1}, {{1}, 1}};
    const auto model = fit_tabular_nb(data, alphabet, labels);
    CHECK(model.prior().values() == Vector{0.5, 0.5});
  }
  SUBCASE("add-one smoothing") {
    const std::vector<DiscreteExample> data{{{0, 0}, 0}, {{0, 0}, 0}, {{1}, 1}};
    const auto model = fit_tabular_nb(data, alphabet, labels);
    CHECK(model.emission(0)[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(model.emission(0)[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_tabular_nb(std::vector<DiscreteExample>{}, alphabet, labels), EmptyData);
    const std::vector<DiscreteExample> bad{{{0, 7}, 0}};
    CHECK_THROWS_AS(fit_tabular_nb(bad, alphabet, labels), UnknownSymbol);
  }
  SUBCASE("randomized 3-class corpus against a recount") {
    std::mt19937_64 rng(11);
    const auto alpha5 = DiscreteAlphabet::numbered(5);
    const auto labels3 = LabelSet::numbered(3);
    std::vector<DiscreteExample> data;
    std::uniform_int_distribution<std::size_t> lab(0, 2), len(1, 9);
    for (int e = 0; e < 300; ++e) {
      data.push_back({random_symbols(rng, len(rng), 5), lab(rng)});
    }
    const auto model = fit_tabular_nb(data, alpha5, labels3);
    std::map<std::size_t, double> docs;
    std::map<std::pair<std::size_t, std::size_t>, double> tokens;
    std::map<std::size_t, double> class_tokens;
    for (const auto& ex : data) {
      docs[ex.label] += 1;
      for (auto s : ex.symbols) {
        tokens[{ex.label, s}] += 1;
        class_tokens[ex.label] += 1;
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(model.prior()[i] == doctest::Approx(docs[i] / 300.0).epsilon(1e-14));
      for (std::size_t s = 0; s < 5; ++s) {
        const double expected = (tokens[{i, s}] + 1.0) / (class_tokens[i] + 5.0);
        CHECK(model.emission(i)[s] == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("nb_posterior_generative") {
  SUBCASE("uniform model gives a uniform posterior") {
    const TabularNB model(ProbVector::uniform(3), std::vector<ProbVector>(3, ProbVector::uniform(4)));
    const std::vector<std::size_t> y{0, 3, 2, 2, 1};
    for (double p : nb_posterior_generative(model, y).values()) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("two-symbol example") {
    const TabularNB model(ProbVector({0.5, 0.5}), {ProbVector({0.9, 0.1}), ProbVector({0.2, 0.8})});
    const std::vector<std::size_t> y{0, 0};
    const auto p = nb_posterior_generative(model, y);
    // norm([0.405, 0.02]), exact rationals.
    CHECK(p[0] == doctest::Approx(0.9529411764705882).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.047058823529411764).epsilon(1e-14));
  }
  SUBCASE("T = 200 with skewed emissions") {
    const TabularNB model(ProbVector({0.3, 0.7}),
                          {ProbVector({0.7, 0.2, 0.1}), ProbVector({0.1, 0.3, 0.6})});
    std::vector<std::size_t> y;
    for (std::size_t t = 0; t < 200; ++t) y.push_back(((7 * t) % 11) % 3);
    const auto p = nb_posterior_generative(model, y);
    // Exact rational evaluation of the product form.
    CHECK(p[0] == doctest::Approx(0.9999996446558732).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(3.5534412678451296e-07).epsilon(1e-9));
  }
  SUBCASE("no underflow for very long sequences") {
    const TabularNB model(ProbVector({0.5, 0.5}), {ProbVector({0.6, 0.4}), ProbVector({0.4, 0.6})});
    std::vector<std::size_t> y(5000, 0);
    y[0] = 1;
    const auto p = nb_posterior_generative(model, y);
    CHECK(std::isfinite(p[0]));
    CHECK(p[0] == doctest::Approx(1.0));
  }
  SUBCASE("unknown symbol") {
    const TabularNB model(ProbVector({0.5, 0.5}), {ProbVector({0.9, 0.1}), ProbVector({0.2, 0.8})});
    const std::vector<std::size_t> y{0, 2};
    CHECK_THROWS_AS(nb_posterior_generative(model, y), UnknownSymbol);
  }
}

TEST_CASE("derive_posteriors_from_joint") {
  SUBCASE("uniform order-0 model") {
    const PooledJointSpec spec(0, ProbVector::uniform(2), {ProbVector::uniform(3), ProbVector::uniform(3)});
    const auto t = derive_posteriors_from_joint(spec);
    for (double v : t.l1_data()) CHECK(v == doctest::Approx(0.5));
    for (double v : t.l2_data()) CHECK(v == doctest::Approx(0.5));
    for (double v : t.l3_data()) CHECK(v == doctest::Approx(0.5));
  }
  SUBCASE("order-0 Bayes rule by hand") {
    const PooledJointSpec spec(0, ProbVector({0.3, 0.7}), {ProbVector({0.9, 0.1}), ProbVector({0.4, 0.6})});
    const auto t = derive_posteriors_from_joint(spec);
    // y = 0: [0.27, 0.28] / 0.55; y = 1: [0.03, 0.42] / 0.45
    CHECK(t.l1(0)[0] == doctest::Approx(0.27 / 0.55).epsilon(1e-14));
    CHECK(t.l1(0)[1] == doctest::Approx(0.28 / 0.55).epsilon(1e-14));
    CHECK(t.l1(1)[0] == doctest::Approx(0.03 / 0.45).epsilon(1e-14));
    CHECK(t.l1(1)[1] == doctest::Approx(0.42 / 0.45).epsilon(1e-14));
  }
  SUBCASE("order-1 L2 equals the brute-force window marginal") {
    const auto spec = random_joint_spec(1, 2, 3, 5);
    const auto t = derive_posteriors_from_joint(spec);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        Vector joint(2);
        for (std::size_t i = 0; i < 2; ++i) joint[i] = brute_marginal(spec, i, a, b);
        const auto expected = norm(joint);
        CHECK(max_abs_diff(t.l2(a, b), expected.span()) < 1e-14);
      }
    }
  }
  SUBCASE("requires strict positivity") {
    const PooledJointSpec spec(0, ProbVector({1.0, 0.0}), {ProbVector({0.5, 0.5}), ProbVector({0.5, 0.5})});
    CHECK_THROWS_AS(derive_posteriors_from_joint(spec), StrictPositivityViolation);
  }
}

TEST_CASE("nb_posterior_discriminative") {
  const auto spec = random_joint_spec(0, 3, 4, 21);
  const auto tables = derive_posteriors_from_joint(spec);
  SUBCASE("T = 1 returns the L1 row") {
    for (std::size_t a = 0; a < 4; ++a) {
      const std::vector<std::size_t> y{a};
      CHECK(max_abs_diff(nb_posterior_discriminative(spec.prior(), tables, y).span(), tables.l1(a)) < 1e-15);
    }
  }
  SUBCASE("uniform tables") {
    const std::vector<std::size_t> y{1, 0, 1, 1};
    const auto p = nb_posterior_discriminative(ProbVector::uniform(2), uniform_tables(2, 2), y);
    CHECK(p[0] == doctest::Approx(0.5));
  }
  SUBCASE("matches the generative form") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = random_joint_spec(0, 2 + trial % 3, 2 + trial % 4, rng());
      const TabularNB model(s.prior(), s.initial_rows());
      const auto t = derive_posteriors_from_joint(to_joint_spec(model));
      const auto y = random_symbols(rng, 1 + trial % 6, s.num_symbols());
      CHECK(max_abs_diff(nb_posterior_discriminative(model.prior(), t, y).span(),
                         nb_posterior_generative(model, y).span()) < 1e-10);
    }
  }
  SUBCASE("zero prior entry") {
    const std::vector<std::size_t> y{0, 1};
    CHECK_THROWS_AS(nb_posterior_discriminative(ProbVector({1.0, 0.0}), uniform_tables(2, 2), y),
                    StrictPositivityViolation);
    const PosteriorTables zero(2, 2, Vector{1, 0, 0.5, 0.5}, Vector(8, 0.5), Vector(16, 0.5));
    CHECK_THROWS_AS(nb_posterior_discriminative(ProbVector::uniform(2), zero, y), StrictPositivityViolation);
  }
}

TEST_CASE("pooledmc_posterior") {
  const auto spec = random_joint_spec(1, 3, 3, 8);
  const auto tables = derive_posteriors_from_joint(spec);
  SUBCASE("T = 2 telescopes to the L2 row") {
    const std::vector<std::size_t> y{2, 0};
    CHECK(max_abs_diff(pooledmc_posterior(tables, y).span(), tables.l2(2, 0)) < 1e-15);
  }
  SUBCASE("uniform tables") {
    const std::vector<std::size_t> y{1, 0, 1};
    CHECK(pooledmc_posterior(uniform_tables(3, 2), y)[2] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("errors") {
    const std::vector<std::size_t> one{0};
    CHECK_THROWS_AS(pooledmc_posterior(tables, one), SequenceTooShort);
    const std::vector<std::size_t> bad{0, 3};
    CHECK_THROWS_AS(pooledmc_posterior(tables, bad), UnknownSymbol);
    Vector l2(8, 0.5);
    l2[2] = 0.0;
    l2[3] = 1.0;
    const PosteriorTables zero(2, 2, Vector(4, 0.5), l2, Vector(16, 0.5));
    const std::vector<std::size_t> y{0, 1};
    CHECK_THROWS_AS(pooledmc_posterior(zero, y), StrictPositivityViolation);
  }
  SUBCASE("matches the joint-law oracle") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = random_joint_spec(1, 2 + trial % 3, std::vector<std::size_t>{2, 3, 5}[trial % 3], rng());
      const auto t = derive_posteriors_from_joint(s);
      const auto y = random_symbols(rng, 2 + trial % 5, s.num_symbols());
      CHECK(max_abs_diff(pooledmc_posterior(t, y).span(), joint_oracle(s, y).span()) < 1e-10);
    }
  }
}

TEST_CASE("pooledmc2_posterior") {
  const auto spec = random_joint_spec(2, 2, 3, 12);
  const auto tables = derive_posteriors_from_joint(spec);
  SUBCASE("T = 3 telescopes to the L3 row") {
    const std::vector<std::size_t> y{1, 2, 0};
    CHECK(max_abs_diff(pooledmc2_posterior(tables, y).span(), tables.l3(1, 2, 0)) < 1e-15);
  }
  SUBCASE("uniform tables") {
    const std::vector<std::size_t> y{1, 0, 1, 0};
    CHECK(pooledmc2_posterior(uniform_tables(2, 2), y)[0] == doctest::Approx(0.5));
  }
  SUBCASE("errors") {
    const std::vector<std::size_t> two{0, 1};
    CHECK_THROWS_AS(pooledmc2_posterior(tables, two), SequenceTooShort);
  }
  SUBCASE("matches the joint-law oracle") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = random_joint_spec(2, 2 + trial % 3, std::vector<std::size_t>{2, 3, 5}[trial % 3], rng());
      const auto t = derive_posteriors_from_joint(s);
      const auto y = random_symbols(rng, 3 + trial % 4, s.num_symbols());
      CHECK(max_abs_diff(pooledmc2_posterior(t, y).span(), joint_oracle(s, y).span()) < 1e-10);
    }
  }
}

TEST_CASE("joint_oracle") {
  SUBCASE("uniform order 0") {
    const PooledJointSpec spec(0, ProbVector::uniform(2), {ProbVector::uniform(2), ProbVector::uniform(2)});
    const std::vector<std::size_t> y{0, 1, 1};
    CHECK(joint_oracle(spec, y)[1] == doctest::Approx(0.5));
  }
  SUBCASE("order 0 agrees with the generative classifier") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto s = random_joint_spec(0, 3, 4, rng());
      const TabularNB model(s.prior(), s.initial_rows());
      const auto y = random_symbols(rng, 1 + trial % 8, 4);
      CHECK(max_abs_diff(joint_oracle(s, y).span(), nb_posterior_generative(model, y).span()) < 1e-14);
    }
  }
  SUBCASE("hand-enumerated order-1 example") {
    const std::vector<std::size_t> y{0, 1, 1};
    // class 0: 0.4 * 0.7 * 0.1 * 0.5 = 0.014; class 1: 0.6 * 0.2 * 0.7 * 0.4 = 0.0336
    const auto p = joint_oracle(hand_order1_spec(), y);
    CHECK(p[0] == doctest::Approx(5.0 / 17.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(12.0 / 17.0).epsilon(1e-14));
  }
}

TEST_CASE("label permutation equivariance") {
  std::mt19937_64 rng(77);
  for (int order = 0; order <= 2; ++order) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto spec = random_joint_spec(order, 3, 3, rng());
      std::vector<std::size_t> perm{2, 0, 1};
      const auto permuted = permute_labels(spec, perm);
      const auto t = derive_posteriors_from_joint(spec);
      const auto tp = derive_posteriors_from_joint(permuted);
      const auto y = random_symbols(rng, 6, 3);
      ProbVector a, b;
      if (order == 0) {
        a = nb_posterior_discriminative(spec.prior(), t, y);
        b = nb_posterior_discriminative(permuted.prior(), tp, y);
      } else if (order == 1) {
        a = pooledmc_posterior(t, y);
        b = pooledmc_posterior(tp, y);
      } else {
        a = pooledmc2_posterior(t, y);
        b = pooledmc2_posterior(tp, y);
      }
      for (std::size_t i = 0; i < 3; ++i) CHECK(b[perm[i]] == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-space and direct products agree for T <= 20") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 3, m = 2 + trial % 4;
    const std::size_t length = 3 + trial % 18;
    const auto y = random_symbols(rng, length, m);
    const auto s0 = random_joint_spec(0, n, m, rng());
    const auto s1 = random_joint_spec(1, n, m, rng());
    const auto s2 = random_joint_spec(2, n, m, rng());
    const auto t0 = derive_posteriors_from_joint(s0);
    const auto t1 = derive_posteriors_from_joint(s1);
    const auto t2 = derive_posteriors_from_joint(s2);
    CHECK(max_abs_diff(nb_posterior_discriminative(s0.prior(), t0, y).span(), direct_nb(s0.prior(), t0, y)) < 1e-9);
    CHECK(max_abs_diff(pooledmc_posterior(t1, y).span(), direct_mc(t1, y)) < 1e-9);
    CHECK(max_abs_diff(pooledmc2_posterior(t2, y).span(), direct_mc2(t2, y)) < 1e-9);
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(PooledJointSpec(3, ProbVector::uniform(2), {ProbVector::uniform(2), ProbVector::uniform(2)}),
                  InvalidInput);
  CHECK_THROWS_AS(PooledJointSpec(1, ProbVector::uniform(2), {ProbVector::uniform(2), ProbVector::uniform(2)}),
                  ShapeError);
  CHECK_THROWS_AS(PooledJointSpec(0, ProbVector::uniform(2), {ProbVector::uniform(2), ProbVector::uniform(3)}),
                  ShapeError);
  CHECK(hand_order1_spec().strictly_positive());
  CHECK_THROWS_AS(PosteriorTables(2, 2, Vector{0.5, 0.6, 0.5, 0.5}, Vector(8, 0.5), Vector(16, 0.5)),
                  InvalidInput);
  CHECK_THROWS_AS(DiscreteAlphabet::numbered(3).index_of("7"), UnknownSymbol);
  CHECK(DiscreteAlphabet({"a", "b"}).encode({"b", "a", "b"}) == std::vector<std::size_t>{1, 0, 1});
}
