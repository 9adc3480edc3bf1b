#include "nnb/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nnb/errors.hpp"

namespace nnb {
namespace {

using Row = std::vector<std::string>;

// RFC 4180 records; quoted fields may hold separators, quotes ("") and newlines.
std::vector<Row> parse_delimited(std::istream& in, char sep) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == sep) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (in.peek() != '\n') end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw FormatError("unterminated quoted field at end of file");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string json_field_text(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer() || value.is_boolean()) return value.dump();
  if (value.is_number()) return value.dump();
  throw FormatError("field is neither a string nor a number");
}

TextDataset finish(std::vector<TextExample> examples) {
  if (examples.empty()) throw EmptyData("dataset contains no records");
  std::set<std::string> names;
  for (const auto& ex : examples) names.insert(ex.label);
  return TextDataset{std::move(examples), std::vector<std::string>(names.begin(), names.end())};
}

TextDataset load_jsonl(std::istream& in, const std::string& text_field, const std::string& label_field) {
  std::vector<TextExample> examples;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++record;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("record " + std::to_string(record) + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw FormatError("record " + std::to_string(record) + ": not a JSON object");
    for (const auto* field : {&text_field, &label_field}) {
      if (!obj.contains(*field)) {
        throw FormatError("record " + std::to_string(record) + ": missing field '" + *field + "'");
      }
    }
    try {
      examples.push_back({json_field_text(obj[text_field]), json_field_text(obj[label_field])});
    } catch (const FormatError& e) {
      throw FormatError("record " + std::to_string(record) + ": " + e.what());
    }
  }
  return finish(std::move(examples));
}

TextDataset load_delimited(std::istream& in, char sep, const std::string& text_field,
                           const std::string& label_field) {
  const auto rows = parse_delimited(in, sep);
  if (rows.empty()) throw EmptyData("dataset file is empty");
  const Row& header = rows.front();
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError("header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t text_col = column(text_field);
  const std::size_t label_col = column(label_field);
  std::vector<TextExample> examples;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() <= std::max(text_col, label_col)) {
      throw FormatError("record " + std::to_string(r) + ": missing field '" +
                        (row.size() <= label_col ? label_field : text_field) + "'");
    }
    examples.push_back({row[text_col], row[label_col]});
  }
  return finish(std::move(examples));
}

std::size_t draw(std::mt19937_64& rng, const ProbVector& p) {
  std::discrete_distribution<std::size_t> dist(p.values().begin(), p.values().end());
  return dist(rng);
}

std::vector<ProbVector> random_rows(std::size_t count, std::size_t width, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.01, 1.0);
  std::vector<ProbVector> rows;
  rows.reserve(count);
  Vector w(width);
  for (std::size_t r = 0; r < count; ++r) {
    for (double& x : w) x = dist(rng);
    rows.push_back(norm(w));
  }
  return rows;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "csv") return DatasetFormat::csv;
  if (name == "tsv") return DatasetFormat::tsv;
  throw InvalidInput("unknown dataset format '" + std::string(name) + "' (jsonl, csv, tsv)");
}

LabelSet TextDataset::label_set() const { return LabelSet(label_names); }

TextDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                         const std::string& text_field, const std::string& label_field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset " + path.string());
  switch (format) {
    case DatasetFormat::jsonl:
      return load_jsonl(in, text_field, label_field);
    case DatasetFormat::csv:
      return load_delimited(in, ',', text_field, label_field);
    case DatasetFormat::tsv:
      return load_delimited(in, '\t', text_field, label_field);
  }
  throw InvalidInput("unknown dataset format");
}

void SplitPlan::validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidInput("validation fraction must lie in (0, 1)");
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            const SplitPlan& plan) {
  plan.validate();
  if (n < 4) throw InvalidInput("splitting needs at least 4 examples, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(plan.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::floor(plan.validation_fraction * static_cast<double>(n)));
  std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return {std::move(train), std::move(validation)};
}

std::pair<TextDataset, TextDataset> split(const TextDataset& dataset, const SplitPlan& plan) {
  const auto [train_idx, val_idx] = split_indices(dataset.examples.size(), plan);
  TextDataset train{{}, dataset.label_names};
  TextDataset val{{}, dataset.label_names};
  for (std::size_t i : train_idx) train.examples.push_back(dataset.examples[i]);
  for (std::size_t i : val_idx) val.examples.push_back(dataset.examples[i]);
  return {std::move(train), std::move(val)};
}

std::vector<DiscreteExample> synth_generate(const PooledJointSpec& spec, std::size_t count,
                                            LengthRange lengths, std::uint64_t seed) {
  if (lengths.min_length < 1 || lengths.max_length < lengths.min_length) {
    throw InvalidInput("sequence lengths need 1 <= min <= max");
  }
  const std::size_t m = spec.num_symbols();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length_dist(lengths.min_length, lengths.max_length);
  std::vector<DiscreteExample> out;
  out.reserve(count);
  for (std::size_t e = 0; e < count; ++e) {
    DiscreteExample ex;
    ex.label = draw(rng, spec.prior());
    const std::size_t i = ex.label;
    const std::size_t length = length_dist(rng);
    ex.symbols.reserve(length);
    ex.symbols.push_back(draw(rng, spec.initial_rows()[i]));
    for (std::size_t t = 1; t < length; ++t) {
      const std::size_t prev = ex.symbols[t - 1];
      if (spec.order() == 0) {
        ex.symbols.push_back(draw(rng, spec.initial_rows()[i]));
      } else if (spec.order() == 1 || t == 1) {
        ex.symbols.push_back(draw(rng, spec.transition_rows()[i * m + prev]));
      } else {
        const std::size_t prev2 = ex.symbols[t - 2];
        ex.symbols.push_back(draw(rng, spec.transition2_rows()[(i * m + prev2) * m + prev]));
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

PooledJointSpec random_joint_spec(int order, std::size_t num_labels, std::size_t num_symbols,
                                  std::uint64_t seed) {
  if (order < 0 || order > 2) throw InvalidInput("order must be 0, 1 or 2");
  std::mt19937_64 rng(seed);
  const std::size_t n = num_labels, m = num_symbols;
  ProbVector prior = random_rows(1, n, rng).front();
  auto initial = random_rows(n, m, rng);
  std::vector<ProbVector> transition, transition2;
  if (order >= 1) transition = random_rows(n * m, m, rng);
  if (order == 2) transition2 = random_rows(n * m * m, m, rng);
  return PooledJointSpec(order, std::move(prior), std::move(initial), std::move(transition),
                         std::move(transition2));
}

}  // namespace nnb
