#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nnb/core.hpp"
#include "nnb/tabular.hpp"

namespace nnb {

enum class DatasetFormat { jsonl, csv, tsv };

/// "jsonl", "csv" or "tsv"; throws InvalidInput otherwise.
DatasetFormat parse_dataset_format(std::string_view name);

struct TextExample {
  std::string text;
  std::string label;
};

struct TextDataset {
  std::vector<TextExample> examples;
  /// Sorted distinct label names found in the file.
  std::vector<std::string> label_names;

  /// Throws InvalidInput when fewer than two labels occur.
  LabelSet label_set() const;
};

/// Loads records in file order. jsonl: one object per line, numeric labels
/// are converted to their decimal text. csv/tsv: header row, RFC 4180 quoting.
/// Missing fields raise FormatError naming the 1-based record; an empty file raises EmptyData.
TextDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                         const std::string& text_field = "text",
                         const std::string& label_field = "label");

struct SplitPlan {
  double validation_fraction = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seeded shuffle of 0..n-1; the first floor(fraction * n) indices form the
/// validation part. Returns (train, validation).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            const SplitPlan& plan);

std::pair<TextDataset, TextDataset> split(const TextDataset& dataset, const SplitPlan& plan);

struct LengthRange {
  std::size_t min_length = 1;
  std::size_t max_length = 1;
};

/// Ancestral sampling: X ~ prior, then Y_1, Y_2, ... from the spec's conditionals.
/// Sequence lengths are uniform over the range.
std::vector<DiscreteExample> synth_generate(const PooledJointSpec& spec, std::size_t count,
                                            LengthRange lengths, std::uint64_t seed);

/// A strictly positive spec whose rows are normalized uniform draws on [0.01, 1).
PooledJointSpec random_joint_spec(int order, std::size_t num_labels, std::size_t num_symbols,
                                  std::uint64_t seed);

}  // namespace nnb
