#pragma once

#include "attnlex/atnx.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attnlex {

/// A run of token positions that collapses to one row/column: either all
/// tokens of one word, or a single special token.
struct TokenGroup {
  std::size_t first = 0; // first token position
  std::size_t count = 0;
  WordId word;           // nullopt for a special token
};

/// Groups in token order; requires a valid alignment.
std::vector<TokenGroup> token_groups(std::span<const WordId> word_ids);

/// Word-level attention for one head. Rows and columns index the groups
/// returned by token_groups; each row sums to 1.
struct WordAttentionMatrix {
  std::vector<TokenGroup> groups;
  std::vector<double> values; // groups.size() squared, row-major

  std::size_t size() const { return groups.size(); }
  double operator()(std::size_t row, std::size_t col) const { return values[row * size() + col]; }
};

/// Sums the columns of each group, then averages the rows of each group.
/// `token_matrix` is T×T row-major with T = word_ids.size().
WordAttentionMatrix collapse_tokens(std::span<const double> token_matrix,
                                    std::span<const WordId> word_ids);

struct ReceivedAttention {
  std::size_t position = 0; // group index in the word matrix
  std::size_t word = 0;     // index into the record's words
  double weight = 0.0;
};

/// Mean over source rows of the attention each word column receives.
/// Special-token columns are never reported; with `drop_special_rows` the
/// special-token rows are also left out of the mean.
std::vector<ReceivedAttention> received_attention(const WordAttentionMatrix& matrix,
                                                  bool drop_special_rows = false);

struct WordAttentionSample {
  std::size_t head = 0;
  std::string lemma;
  std::size_t record = 0; // index of the source record in the corpus
  double weight = 0.0;
};

struct AggregateOptions {
  bool drop_special_rows = false;
};

/// One sample per (record, head, word) at the given layer, ordered by record,
/// then head, then word position.
std::vector<WordAttentionSample> aggregate_corpus(const Corpus& corpus, std::size_t layer,
                                                  const AggregateOptions& options = {});

} // namespace attnlex
