#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nnb/core.hpp"

namespace nnb {

/// Token -> d-dimensional vector, in file order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  /// Returns false (and keeps the existing vector) if the token is already present.
  bool insert(std::string token, std::span<const double> vector);
  /// Empty span for unknown tokens.
  std::span<const double> lookup(std::string_view token) const;
  bool contains(std::string_view token) const;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Vector data_;
};

/// Reads a word2vec-style text file: an optional "count dim" header line,
/// then "token v1 ... vd" per line. Duplicate tokens keep the first vector.
/// Throws FormatError (with the line number) on ragged rows, bad numbers,
/// or a dimension different from `expected_dim`.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt);
EmbeddingTable read_embeddings(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt);

/// Writes the table with a header line; values round-trip exactly.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

struct TokenizerConfig {
  bool lowercase = true;
  bool split_punctuation = true;
};

/// Whitespace tokenization; ASCII punctuation becomes separate tokens and
/// ASCII letters are lowercased. Bytes >= 0x80 are kept as they are.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

enum class OovPolicy { skip, zero };

/// Looks up every token. An empty result becomes one zero vector so that T >= 1.
EmbeddedSequence embed(std::span<const std::string> tokens, const EmbeddingTable& table,
                       OovPolicy policy = OovPolicy::skip);

}  // namespace nnb
