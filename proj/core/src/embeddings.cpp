#include "nnb/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "nnb/errors.hpp"
#include "nnb/numeric_text.hpp"

namespace nnb {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_count(std::string_view text, std::size_t& value) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ShapeError("embedding dimension must be >= 1");
}

bool EmbeddingTable::insert(std::string token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ShapeError("vector for '" + token + "' has dimension " + std::to_string(vector.size()) +
                     ", table has " + std::to_string(dim_));
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

EmbeddingTable read_embeddings(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_no = 0;
  Vector values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!table) {
      std::size_t count = 0, dim = 0;
      if (fields.size() == 2 && parse_count(fields[0], count) && parse_count(fields[1], dim)) {
        if (dim == 0) throw FormatError("line " + std::to_string(line_no) + ": header declares dimension 0");
        if (expected_dim && dim != *expected_dim) {
          throw FormatError("line " + std::to_string(line_no) + ": header dimension " +
                            std::to_string(dim) + ", expected " + std::to_string(*expected_dim));
        }
        table.emplace(dim);
        continue;
      }
      if (fields.size() < 2) {
        throw FormatError("line " + std::to_string(line_no) + ": token without a vector");
      }
      const std::size_t inferred = fields.size() - 1;
      if (expected_dim && inferred != *expected_dim) {
        throw FormatError("line " + std::to_string(line_no) + ": vector of dimension " +
                          std::to_string(inferred) + ", expected " + std::to_string(*expected_dim));
      }
      table.emplace(inferred);
    }
    if (fields.size() != table->dim() + 1) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table->dim()) + " values, found " +
                        std::to_string(fields.size() - 1));
    }
    values.resize(table->dim());
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!parse_double(fields[j + 1], values[j])) {
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse '" +
                          std::string(fields[j + 1]) + "' as a number");
      }
    }
    table->insert(std::string(fields[0]), values);
  }
  if (!table || table->empty()) throw FormatError("embedding file contains no vectors");
  return std::move(*table);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open embedding file " + path.string());
  return read_embeddings(in, expected_dim);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (const auto& token : table.tokens()) {
    out << token;
    for (double v : table.lookup(token)) out << ' ' << format_double(v);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write embedding file " + path.string());
  write_embeddings(out, table);
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else if (config.split_punctuation && is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      const auto u = static_cast<unsigned char>(c);
      current.push_back(config.lowercase && u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    }
  }
  flush();
  return tokens;
}

EmbeddedSequence embed(std::span<const std::string> tokens, const EmbeddingTable& table, OovPolicy policy) {
  if (table.empty()) throw InvalidInput("embedding table is empty");
  const std::size_t d = table.dim();
  Vector data;
  data.reserve(tokens.size() * d);
  std::size_t length = 0;
  for (const auto& token : tokens) {
    const auto v = table.lookup(token);
    if (!v.empty()) {
      data.insert(data.end(), v.begin(), v.end());
    } else if (policy == OovPolicy::zero) {
      data.insert(data.end(), d, 0.0);
    } else {
      continue;
    }
    ++length;
  }
  if (length == 0) return EmbeddedSequence::zeros(1, d);
  return EmbeddedSequence(length, d, std::move(data));
}

}  // namespace nnb
