#include "nnb/serialization.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "nnb/numeric_text.hpp"

namespace nnb {

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw InvalidInput("cannot format number");
  return std::string(buf, ptr);
}

bool parse_double(std::string_view text, double& value) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(value);
}

namespace {

constexpr const char* kMagic = "nnb-model";
constexpr int kVersion = 1;

struct Row {
  std::string name;
  Vector values;
  std::size_t line = 0;
};

struct ModelText {
  std::string kind;
  std::vector<std::size_t> shape;
  std::optional<LabelSet> labels;
  std::vector<Row> rows;
  std::size_t next = 0;

  const Row& take(const std::string& name, std::size_t width) {
    if (next >= rows.size()) throw FormatError("missing '" + name + "' row in " + kind + " file");
    const Row& row = rows[next++];
    if (row.name != name) {
      throw FormatError("line " + std::to_string(row.line) + ": expected '" + name + "' row, found '" +
                        row.name + "'");
    }
    if (row.values.size() != width) {
      throw FormatError("line " + std::to_string(row.line) + ": '" + name + "' row has " +
                        std::to_string(row.values.size()) + " values, expected " + std::to_string(width));
    }
    return row;
  }

  ProbVector take_probs(const std::string& name, std::size_t width) {
    const Row& row = take(name, width);
    try {
      return ProbVector(row.values);
    } catch (const InvalidInput& e) {
      throw FormatError("line " + std::to_string(row.line) + ": " + e.what());
    }
  }

  std::vector<ProbVector> take_prob_rows(const std::string& name, std::size_t count, std::size_t width) {
    std::vector<ProbVector> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) out.push_back(take_probs(name, width));
    return out;
  }

  Vector take_flat(const std::string& name, std::size_t count, std::size_t width) {
    Vector out;
    out.reserve(count * width);
    for (std::size_t r = 0; r < count; ++r) {
      const Row& row = take(name, width);
      out.insert(out.end(), row.values.begin(), row.values.end());
    }
    return out;
  }

  void finish() const {
    if (next != rows.size()) {
      throw FormatError("line " + std::to_string(rows[next].line) + ": unexpected row '" +
                        rows[next].name + "'");
    }
  }

  void expect(const std::string& expected_kind, std::size_t shape_len) const {
    if (kind != expected_kind) throw FormatError("expected a " + expected_kind + " file, found " + kind);
    if (shape.size() != shape_len) {
      throw FormatError(kind + " shape needs " + std::to_string(shape_len) + " integers");
    }
  }
};

std::vector<std::string> words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

ModelText parse(std::istream& in) {
  ModelText m;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw FormatError("empty model file");
  {
    const auto w = words(line);
    if (w.size() != 3 || w[0] != kMagic) throw FormatError("line 1: not an nnb model file");
    if (w[1] != std::to_string(kVersion)) throw FormatError("line 1: unsupported format version " + w[1]);
    m.kind = w[2];
  }
  if (!next_line(in, line, line_no)) throw FormatError("missing shape line");
  {
    const auto w = words(line);
    if (w.empty() || w[0] != "shape") throw FormatError("line 2: expected 'shape'");
    for (std::size_t i = 1; i < w.size(); ++i) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(w[i].data(), w[i].data() + w[i].size(), v);
      if (ec != std::errc() || ptr != w[i].data() + w[i].size()) {
        throw FormatError("line 2: bad shape entry '" + w[i] + "'");
      }
      m.shape.push_back(v);
    }
  }
  if (!next_line(in, line, line_no)) throw FormatError("missing labels line");
  {
    const auto w = words(line);
    std::size_t count = 0;
    if (w.size() != 2 || w[0] != "labels" || std::from_chars(w[1].data(), w[1].data() + w[1].size(), count).ec != std::errc()) {
      throw FormatError("line 3: expected 'labels <count>'");
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) {
      if (!next_line(in, line, line_no)) throw FormatError("truncated label list");
      names.push_back(line);
    }
    if (count > 0) {
      try {
        m.labels.emplace(std::move(names));
      } catch (const InvalidInput& e) {
        throw FormatError(std::string("label list: ") + e.what());
      }
    }
  }
  bool ended = false;
  while (next_line(in, line, line_no)) {
    const auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "end") {
      ended = true;
      break;
    }
    Row row{w[0], Vector(w.size() - 1), line_no};
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (!parse_double(w[i], row.values[i - 1])) {
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse '" + w[i] + "'");
      }
    }
    m.rows.push_back(std::move(row));
  }
  if (!ended) throw FormatError("model file is truncated (no 'end' line)");
  return m;
}

void check_labels(const std::optional<LabelSet>& labels, std::size_t n) {
  if (labels && labels->size() != n) {
    throw ShapeError("label set has " + std::to_string(labels->size()) + " names, model has " +
                     std::to_string(n) + " labels");
  }
  if (labels) {
    for (const auto& name : labels->names()) {
      if (name.find('\n') != std::string::npos || name.find('\r') != std::string::npos) {
        throw InvalidInput("label names must not contain line breaks");
      }
    }
  }
}

void header(std::ostream& out, const char* kind, std::initializer_list<std::size_t> shape,
            const std::optional<LabelSet>& labels) {
  out << kMagic << ' ' << kVersion << ' ' << kind << "\nshape";
  for (std::size_t s : shape) out << ' ' << s;
  out << "\nlabels " << (labels ? labels->size() : 0) << '\n';
  if (labels) {
    for (const auto& name : labels->names()) out << name << '\n';
  }
}

void row(std::ostream& out, const char* name, std::span<const double> values) {
  out << name;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

void rows(std::ostream& out, const char* name, std::span<const double> flat, std::size_t width) {
  for (std::size_t start = 0; start < flat.size(); start += width) row(out, name, flat.subspan(start, width));
}

void rows(std::ostream& out, const char* name, const std::vector<ProbVector>& vs) {
  for (const auto& v : vs) row(out, name, v.span());
}

}  // namespace

void write_model(std::ostream& out, const TabularNB& model, const std::optional<LabelSet>& labels) {
  check_labels(labels, model.num_labels());
  header(out, "tabular-nb", {model.num_labels(), model.num_symbols(), 0}, labels);
  row(out, "prior", model.prior().span());
  for (std::size_t i = 0; i < model.num_labels(); ++i) row(out, "emission", model.emission(i).span());
  out << "end\n";
}

void write_model(std::ostream& out, const PooledJointSpec& spec, const std::optional<LabelSet>& labels) {
  check_labels(labels, spec.num_labels());
  header(out, "pooled-joint",
         {spec.num_labels(), spec.num_symbols(), static_cast<std::size_t>(spec.order())}, labels);
  row(out, "prior", spec.prior().span());
  rows(out, "initial", spec.initial_rows());
  rows(out, "transition", spec.transition_rows());
  rows(out, "transition2", spec.transition2_rows());
  out << "end\n";
}

void write_model(std::ostream& out, const PosteriorTables& tables, const std::optional<LabelSet>& labels) {
  const std::size_t n = tables.num_labels();
  check_labels(labels, n);
  header(out, "posterior-tables", {n, tables.num_symbols(), 2}, labels);
  rows(out, "l1", tables.l1_data(), n);
  rows(out, "l2", tables.l2_data(), n);
  rows(out, "l3", tables.l3_data(), n);
  out << "end\n";
}

void write_model(std::ostream& out, const GaussianNB& model, const std::optional<LabelSet>& labels) {
  check_labels(labels, model.num_labels());
  header(out, "gaussian-nb", {model.num_labels(), 1, 0}, labels);
  row(out, "prior", model.prior().span());
  row(out, "mean", model.mean());
  row(out, "sigma", model.sigma());
  out << "end\n";
}

void write_model(std::ostream& out, const PooledScorer& scorer, const std::optional<LabelSet>& labels) {
  const auto& p = scorer.params();
  check_labels(labels, scorer.num_labels());
  header(out, "neural-pooled-mc",
         {scorer.num_labels(), scorer.embed_dim(), scorer.order(), p.spec.hidden_dim}, labels);
  rows(out, "w1", p.w1, p.spec.input_dim);
  row(out, "b1", p.b1);
  rows(out, "w2", p.w2, p.spec.hidden_dim);
  row(out, "b2", p.b2);
  out << "end\n";
}

StoredModel<TabularNB> read_tabular_nb(std::istream& in) {
  ModelText m = parse(in);
  m.expect("tabular-nb", 3);
  const std::size_t n = m.shape[0], s = m.shape[1];
  ProbVector prior = m.take_probs("prior", n);
  auto emission = m.take_prob_rows("emission", n, s);
  m.finish();
  check_labels(m.labels, n);
  return {TabularNB(std::move(prior), std::move(emission)), std::move(m.labels)};
}

StoredModel<PooledJointSpec> read_pooled_joint(std::istream& in) {
  ModelText m = parse(in);
  m.expect("pooled-joint", 3);
  const std::size_t n = m.shape[0], s = m.shape[1], order = m.shape[2];
  if (order > 2) throw FormatError("pooled-joint order must be 0, 1 or 2");
  ProbVector prior = m.take_probs("prior", n);
  auto initial = m.take_prob_rows("initial", n, s);
  std::vector<ProbVector> transition, transition2;
  if (order >= 1) transition = m.take_prob_rows("transition", n * s, s);
  if (order == 2) transition2 = m.take_prob_rows("transition2", n * s * s, s);
  m.finish();
  check_labels(m.labels, n);
  return {PooledJointSpec(static_cast<int>(order), std::move(prior), std::move(initial),
                          std::move(transition), std::move(transition2)),
          std::move(m.labels)};
}

StoredModel<PosteriorTables> read_posterior_tables(std::istream& in) {
  ModelText m = parse(in);
  m.expect("posterior-tables", 3);
  const std::size_t n = m.shape[0], s = m.shape[1];
  Vector l1 = m.take_flat("l1", s, n);
  Vector l2 = m.take_flat("l2", s * s, n);
  Vector l3 = m.take_flat("l3", s * s * s, n);
  m.finish();
  check_labels(m.labels, n);
  try {
    return {PosteriorTables(n, s, std::move(l1), std::move(l2), std::move(l3)), std::move(m.labels)};
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
}

StoredModel<GaussianNB> read_gaussian_nb(std::istream& in) {
  ModelText m = parse(in);
  m.expect("gaussian-nb", 3);
  const std::size_t n = m.shape[0];
  ProbVector prior = m.take_probs("prior", n);
  Vector mean = m.take("mean", n).values;
  Vector sigma = m.take("sigma", n).values;
  m.finish();
  check_labels(m.labels, n);
  try {
    return {GaussianNB(std::move(prior), std::move(mean), std::move(sigma)), std::move(m.labels)};
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
}

StoredModel<PooledScorer> read_scorer(std::istream& in) {
  ModelText m = parse(in);
  m.expect("neural-pooled-mc", 4);
  const std::size_t n = m.shape[0], d = m.shape[1], order = m.shape[2], hidden = m.shape[3];
  const MlpSpec spec{(order + 1) * d, hidden, n};
  try {
    spec.validate();
  } catch (const ShapeError& e) {
    throw FormatError(e.what());
  }
  MlpParams p{spec, {}, {}, {}, {}};
  p.w1 = m.take_flat("w1", hidden, spec.input_dim);
  p.b1 = m.take("b1", hidden).values;
  p.w2 = m.take_flat("w2", n, hidden);
  p.b2 = m.take("b2", n).values;
  m.finish();
  check_labels(m.labels, n);
  return {PooledScorer(order, d, std::move(p)), std::move(m.labels)};
}

std::string read_model_kind(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty model file");
  const auto w = words(line);
  if (w.size() != 3 || w[0] != kMagic) throw FormatError(path.string() + " is not an nnb model file");
  return w[2];
}

}  // namespace nnb
