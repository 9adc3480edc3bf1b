#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nnb/errors.hpp"
#include "nnb/gaussian.hpp"
#include "test_support.hpp"

using namespace nnb;
using nnb::testing::random_sequence;

namespace {

// One token per value; each token is a constant d-vector reducing to that value.
EmbeddedSequence scalar_tokens(const Vector& values, std::size_t dim = 3) {
  std::vector<Vector> rows;
  for (double v : values) rows.emplace_back(dim, v);
  return EmbeddedSequence(rows);
}

}  // namespace

TEST_CASE("reduce_word") {
  CHECK(reduce_word(Vector{1, 1, 1}) == 1.0);
  CHECK(reduce_word(Vector{0, 0, 0, 0}) == 0.0);
  CHECK(reduce_word(Vector{1, 2, 3, 6}) == 3.0);
  CHECK_THROWS_AS(reduce_word(Vector{}), ShapeError);
}

TEST_CASE("fit_gaussian_nb") {
  const auto labels = LabelSet::numbered(2);

  SUBCASE("constant class gets the floor") {
    const std::vector<LabeledSequence> data{{scalar_tokens({2, 2}), 0}, {scalar_tokens({2}), 0},
                                            {scalar_tokens({0, 2}), 1}};
    const auto model = fit_gaussian_nb(data, labels);
    CHECK(model.mean()[0] == 2.0);
    CHECK(model.sigma()[0] == kSigmaFloor);
    CHECK(model.mean()[1] == 1.0);
    CHECK(model.sigma()[1] == 1.0);
    CHECK(model.prior()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("empty class") {
    const std::vector<LabeledSequence> data{{scalar_tokens({1}), 0}};
    CHECK_THROWS_AS(fit_gaussian_nb(data, labels), EmptyClass);
  }
  SUBCASE("random corpus against a two-pass recount") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> len(1, 12), lab(0, 2);
    std::vector<LabeledSequence> data;
    for (int e = 0; e < 200; ++e) {
      const std::size_t label = lab(rng);
      auto seq = random_sequence(rng, len(rng), 5, 1.0 + static_cast<double>(label));
      data.push_back({std::move(seq), label});
    }
    const auto model = fit_gaussian_nb(data, LabelSet::numbered(3));
    for (std::size_t i = 0; i < 3; ++i) {
      Vector xs;
      double docs = 0;
      for (const auto& ex : data) {
        if (ex.label != i) continue;
        docs += 1;
        for (std::size_t t = 0; t < ex.sequence.length(); ++t) {
          const auto r = ex.sequence.row(t);
          double s = 0;
          for (double v : r) s += v;
          xs.push_back(s / static_cast<double>(r.size()));
        }
      }
      double mean = 0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size());
      CHECK(std::abs(model.mean()[i] - mean) < 1e-12);
      CHECK(std::abs(model.sigma()[i] - std::sqrt(var)) < 1e-12);
      CHECK(model.prior()[i] == doctest::Approx(docs / 200.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("GaussianNB validation") {
  CHECK_THROWS_AS(GaussianNB(ProbVector::uniform(2), {0, 1}, {1, 0}), InvalidInput);
  CHECK_THROWS_AS(GaussianNB(ProbVector::uniform(2), {0, 1, 2}, {1, 1, 1}), ShapeError);
}

TEST_CASE("gaussian_nb_predict") {
  SUBCASE("symmetric model at the midpoint") {
    const GaussianNB model(ProbVector::uniform(2), {-1, 1}, {2, 2});
    const auto out = gaussian_nb_predict(model, scalar_tokens({0, 0, 0}));
    CHECK(out.posterior[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.label == 0);
  }
  SUBCASE("density dominance") {
    const GaussianNB model(ProbVector::uniform(2), {0, 10}, {1, 1});
    CHECK(gaussian_nb_predict(model, scalar_tokens({0})).label == 0);
  }
  SUBCASE("frozen two-token value") {
    const GaussianNB model(ProbVector::uniform(2), {0, 1}, {1, 1});
    const auto out = gaussian_nb_predict(model, scalar_tokens({0.9, 0.9}));
    // Direct density evaluation.
    CHECK(out.posterior[0] == doctest::Approx(0.31002551887238744).epsilon(1e-13));
    CHECK(out.posterior[1] == doctest::Approx(0.6899744811276125).epsilon(1e-13));
    CHECK(out.label == 1);
  }
  SUBCASE("far-out observations stay finite") {
    const GaussianNB model(ProbVector::uniform(2), {0, 1}, {kSigmaFloor, 1});
    const auto out = gaussian_nb_predict(model, scalar_tokens({500, -300}));
    CHECK(std::isfinite(out.posterior[0]));
    CHECK(out.label == 1);
  }
}

TEST_CASE("gaussian_nb_predict is invariant under token permutation") {
  std::mt19937_64 rng(8);
  const GaussianNB model(ProbVector({0.2, 0.5, 0.3}), {-0.3, 0.1, 0.4}, {0.5, 1.2, 0.8});
  for (int trial = 0; trial < 100; ++trial) {
    const auto seq = random_sequence(rng, 2 + trial % 9, 4);
    std::vector<Vector> rows;
    for (std::size_t t = 0; t < seq.length(); ++t) rows.emplace_back(seq.row(t).begin(), seq.row(t).end());
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto a = gaussian_nb_predict(model, seq);
    const auto b = gaussian_nb_predict(model, EmbeddedSequence(rows));
    CHECK(a.label == b.label);
    double total = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a.posterior[i] == doctest::Approx(b.posterior[i]).epsilon(1e-12));
      CHECK(a.posterior[i] >= 0.0);
      total += a.posterior[i];
    }
    CHECK(std::abs(total - 1.0) <= kProbabilitySumTolerance);
  }
}

TEST_CASE("common rescaling of sigma and distances keeps the argmax on symmetric models") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = pos(rng), s = pos(rng), c = pos(rng);
    Vector xs(1 + trial % 6);
    for (double& x : xs) x = u(rng);
    Vector scaled = xs;
    for (double& x : scaled) x *= c;
    const GaussianNB base(ProbVector::uniform(2), {-m, m}, {s, s});
    const GaussianNB big(ProbVector::uniform(2), {-c * m, c * m}, {c * s, c * s});
    CHECK(gaussian_nb_predict(base, scalar_tokens(xs)).label ==
          gaussian_nb_predict(big, scalar_tokens(scaled)).label);
  }
}
