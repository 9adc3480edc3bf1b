#pragma once

// Versioned plain-text model files.
//
//   nnb-model 1 <kind>
//   shape <integers>
//   labels <K>
//   <label name>            (K lines)
//   <row name> <values>     (repeated, kind-specific)
//   end
//
// Kinds and shapes:
//   tabular-nb        shape N M 0          prior, emission x N
//   pooled-joint      shape N M order      prior, initial x N, transition x N*M, transition2 x N*M*M
//   posterior-tables  shape N M 2          l1 x M, l2 x M^2, l3 x M^3
//   gaussian-nb       shape N 1 0          prior, mean, sigma
//   neural-pooled-mc  shape N d k hidden   w1 x hidden, b1, w2 x N, b2
//
// Values are written as the shortest decimal that parses back to the same
// double, so every round trip is exact.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>

#include "nnb/core.hpp"
#include "nnb/errors.hpp"
#include "nnb/gaussian.hpp"
#include "nnb/neural.hpp"
#include "nnb/tabular.hpp"

namespace nnb {

template <class Model>
struct StoredModel {
  Model model;
  std::optional<LabelSet> labels;
};

void write_model(std::ostream& out, const TabularNB& model, const std::optional<LabelSet>& labels = {});
void write_model(std::ostream& out, const PooledJointSpec& spec, const std::optional<LabelSet>& labels = {});
void write_model(std::ostream& out, const PosteriorTables& tables, const std::optional<LabelSet>& labels = {});
void write_model(std::ostream& out, const GaussianNB& model, const std::optional<LabelSet>& labels = {});
void write_model(std::ostream& out, const PooledScorer& scorer, const std::optional<LabelSet>& labels = {});

StoredModel<TabularNB> read_tabular_nb(std::istream& in);
StoredModel<PooledJointSpec> read_pooled_joint(std::istream& in);
StoredModel<PosteriorTables> read_posterior_tables(std::istream& in);
StoredModel<GaussianNB> read_gaussian_nb(std::istream& in);
StoredModel<PooledScorer> read_scorer(std::istream& in);

/// The kind tag of a model file, e.g. "gaussian-nb".
std::string read_model_kind(const std::filesystem::path& path);

template <class Model>
void save_model(const std::filesystem::path& path, const Model& model,
                const std::optional<LabelSet>& labels = {}) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write model file " + path.string());
  write_model(out, model, labels);
  if (!out) throw InvalidInput("failed while writing " + path.string());
}

/// Opens `path` and applies one of the read_* functions.
template <class Reader>
auto load_model(const std::filesystem::path& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file " + path.string());
  return reader(in);
}

}  // namespace nnb
