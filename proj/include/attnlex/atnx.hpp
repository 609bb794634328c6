#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace attnlex {

/// Row sums of exported attention must lie within this distance of 1.
inline constexpr double kRowSumTolerance = 1e-3;

struct TensorShape {
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t tokens = 0;

  std::size_t size() const { return layers * heads * tokens * tokens; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

using WordId = std::optional<std::size_t>; // nullopt marks a special token

/// One text: its subword tokens, their word alignment, lemmatized words and
/// the [L, H, T, T] attention tensor in row-major order.
///
/// `raw` keeps the values exactly as exported (float32); `attention` holds the
/// same values with every row divided by its sum. Use `finalize_record` after
/// filling the fields by hand.
struct AttentionRecord {
  std::string text_id;
  std::optional<std::string> label;
  std::vector<std::string> tokens;
  std::vector<WordId> word_ids;
  std::vector<std::string> words;
  TensorShape shape;
  std::vector<float> raw;
  std::vector<double> attention;

  /// T×T row-major matrix of one head.
  std::span<const double> matrix(std::size_t layer, std::size_t head) const;
  std::span<const float> raw_matrix(std::size_t layer, std::size_t head) const;
};

/// Checks every record invariant (alignment, shape, value range, row sums of
/// `raw`) and fills `attention` with the row-normalized tensor. Throws
/// DataError naming the text_id and the offending field or row.
void finalize_record(AttentionRecord& record);

/// Alignment-only check, shared with the aggregation code.
void validate_alignment(std::span<const WordId> word_ids, std::size_t word_count,
                        std::string_view text_id);

class Corpus {
public:
  Corpus() = default;

  /// Appends a finalized record; enforces shared L/H and unique text_id.
  void add(AttentionRecord record);

  const std::vector<AttentionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t layers() const { return layers_; }
  std::size_t heads() const { return heads_; }

private:
  std::vector<AttentionRecord> records_;
  std::unordered_set<std::string> ids_;
  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
};

enum class AttentionEncoding { F32Base64, Json };

/// Parses one NDJSON line into a finalized record.
AttentionRecord parse_record(std::string_view line);

/// Serializes one record as a single JSON line (no trailing newline).
std::string format_record(const AttentionRecord& record,
                          AttentionEncoding encoding = AttentionEncoding::F32Base64);

Corpus read_corpus(std::istream& in, std::string_view source_name = "<stream>");
Corpus read_corpus(const std::filesystem::path& path);

/// Validates everything first; nothing is written if any record is invalid or
/// text_ids repeat.
void write_corpus(std::span<const AttentionRecord> records, const std::filesystem::path& path,
                  AttentionEncoding encoding = AttentionEncoding::F32Base64);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                  AttentionEncoding encoding = AttentionEncoding::F32Base64);

namespace detail {
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);
} // namespace detail

} // namespace attnlex
