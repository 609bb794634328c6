#include "attnlex/word_aggregation.hpp"

#include "attnlex/error.hpp"

namespace attnlex {

std::vector<TokenGroup> token_groups(std::span<const WordId> word_ids) {
  std::vector<TokenGroup> groups;
  for (std::size_t t = 0; t < word_ids.size(); ++t) {
    const WordId& w = word_ids[t];
    if (w && !groups.empty() && groups.back().word == w) {
      ++groups.back().count;
      continue;
    }
    groups.push_back({t, 1, w});
  }
  return groups;
}

WordAttentionMatrix collapse_tokens(std::span<const double> token_matrix,
                                    std::span<const WordId> word_ids) {
  const std::size_t T = word_ids.size();
  if (T == 0 || token_matrix.size() != T * T)
    throw DataError("collapse_tokens: alignment length " + std::to_string(T) +
                    " does not match a matrix of " + std::to_string(token_matrix.size()) +
                    " entries");

  WordAttentionMatrix out;
  out.groups = token_groups(word_ids);
  const std::size_t W = out.groups.size();

  // Columns first: T rows × W word columns.
  std::vector<double> summed(T * W, 0.0);
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t g = 0; g < W; ++g) {
      const auto& grp = out.groups[g];
      double s = 0.0;
      for (std::size_t j = grp.first; j < grp.first + grp.count; ++j)
        s += token_matrix[i * T + j];
      summed[i * W + g] = s;
    }

  out.values.assign(W * W, 0.0);
  for (std::size_t a = 0; a < W; ++a) {
    const auto& grp = out.groups[a];
    for (std::size_t b = 0; b < W; ++b) {
      double s = 0.0;
      for (std::size_t i = grp.first; i < grp.first + grp.count; ++i)
        s += summed[i * W + b];
      out.values[a * W + b] = s / static_cast<double>(grp.count);
    }
  }
  return out;
}

std::vector<ReceivedAttention> received_attention(const WordAttentionMatrix& matrix,
                                                  bool drop_special_rows) {
  const std::size_t W = matrix.size();
  std::size_t rows = 0;
  for (const auto& g : matrix.groups)
    if (g.word || !drop_special_rows)
      ++rows;

  std::vector<ReceivedAttention> out;
  if (rows == 0)
    return out;
  for (std::size_t col = 0; col < W; ++col) {
    if (!matrix.groups[col].word)
      continue;
    double s = 0.0;
    for (std::size_t row = 0; row < W; ++row)
      if (matrix.groups[row].word || !drop_special_rows)
        s += matrix(row, col);
    out.push_back({col, *matrix.groups[col].word, s / static_cast<double>(rows)});
  }
  return out;
}

std::vector<WordAttentionSample> aggregate_corpus(const Corpus& corpus, std::size_t layer,
                                                  const AggregateOptions& options) {
  if (!corpus.empty() && layer >= corpus.layers())
    throw UsageError("layer " + std::to_string(layer) + " out of range; valid layers are 0.." +
                     std::to_string(corpus.layers() - 1));

  std::vector<WordAttentionSample> samples;
  const auto& records = corpus.records();
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t h = 0; h < corpus.heads(); ++h) {
      const auto wm = collapse_tokens(rec.matrix(layer, h), rec.word_ids);
      for (const auto& ra : received_attention(wm, options.drop_special_rows))
        samples.push_back({h, rec.words[ra.word], r, ra.weight});
    }
  }
  return samples;
}

} // namespace attnlex
