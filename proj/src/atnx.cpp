#include "attnlex/atnx.hpp"

#include "attnlex/error.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace attnlex {

using nlohmann::json;

namespace {

std::string where(std::string_view text_id, std::string_view field) {
  std::string s = "record '";
  s += text_id;
  s += "', field '";
  s += field;
  s += "': ";
  return s;
}

float load_f32le(const std::uint8_t* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_f32le(float v, std::uint8_t* p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  p[0] = static_cast<std::uint8_t>(bits);
  p[1] = static_cast<std::uint8_t>(bits >> 8);
  p[2] = static_cast<std::uint8_t>(bits >> 16);
  p[3] = static_cast<std::uint8_t>(bits >> 24);
}

void flatten_json(const json& node, std::vector<float>& out, std::string_view text_id) {
  if (node.is_array()) {
    for (const auto& child : node)
      flatten_json(child, out, text_id);
  } else if (node.is_number()) {
    out.push_back(node.get<float>());
  } else {
    throw DataError(where(text_id, "attention.data") + "non-numeric element");
  }
}

std::vector<std::string> string_array(const json& obj, const char* key, std::string_view text_id) {
  if (!obj.contains(key) || !obj[key].is_array())
    throw DataError(where(text_id, key) + "missing or not an array");
  std::vector<std::string> out;
  out.reserve(obj[key].size());
  for (const auto& v : obj[key]) {
    if (!v.is_string())
      throw DataError(where(text_id, key) + "non-string element");
    out.push_back(v.get<std::string>());
  }
  return out;
}

} // namespace

namespace detail {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z')
    return c - 'A';
  if (c >= 'a' && c <= 'z')
    return c - 'a' + 26;
  if (c >= '0' && c <= '9')
    return c - '0' + 52;
  if (c == '+')
    return 62;
  if (c == '/')
    return 63;
  return -1;
}
} // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0)
    throw DataError("base64 payload length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0 || (q[k] = decode_char(c)) < 0)
        throw DataError("invalid base64 character in payload");
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2)
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1)
      out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

} // namespace detail

std::span<const double> AttentionRecord::matrix(std::size_t layer, std::size_t head) const {
  const std::size_t tt = shape.tokens * shape.tokens;
  return std::span<const double>(attention).subspan((layer * shape.heads + head) * tt, tt);
}

std::span<const float> AttentionRecord::raw_matrix(std::size_t layer, std::size_t head) const {
  const std::size_t tt = shape.tokens * shape.tokens;
  return std::span<const float>(raw).subspan((layer * shape.heads + head) * tt, tt);
}

void validate_alignment(std::span<const WordId> word_ids, std::size_t word_count,
                        std::string_view text_id) {
  std::optional<std::size_t> previous;
  std::unordered_set<std::size_t> seen;
  bool gap = false; // a special token interrupted the current word
  for (std::size_t t = 0; t < word_ids.size(); ++t) {
    const WordId& w = word_ids[t];
    if (!w) {
      gap = true;
      continue;
    }
    if (*w >= word_count)
      throw DataError(where(text_id, "word_ids") + "word index " + std::to_string(*w) +
                      " at token " + std::to_string(t) + " out of range for " +
                      std::to_string(word_count) + " words");
    if (previous && *w < *previous)
      throw DataError(where(text_id, "word_ids") + "decreasing word index at token " +
                      std::to_string(t));
    if (previous && *w == *previous && gap)
      throw DataError(where(text_id, "word_ids") + "word " + std::to_string(*w) +
                      " is not a contiguous token run");
    seen.insert(*w);
    previous = w;
    gap = false;
  }
  if (seen.size() != word_count)
    throw DataError(where(text_id, "words") + "has " + std::to_string(word_count) +
                    " entries but alignment references " + std::to_string(seen.size()) +
                    " distinct words");
}

void finalize_record(AttentionRecord& r) {
  const std::string_view id = r.text_id;
  if (r.text_id.empty())
    throw DataError("record with empty text_id");
  const std::size_t T = r.tokens.size();
  if (T == 0)
    throw DataError(where(id, "tokens") + "must not be empty");
  if (r.word_ids.size() != T)
    throw DataError(where(id, "word_ids") + "length " + std::to_string(r.word_ids.size()) +
                    " != token count " + std::to_string(T));
  validate_alignment(r.word_ids, r.words.size(), id);
  if (r.shape.layers == 0 || r.shape.heads == 0)
    throw DataError(where(id, "attention.shape") + "layers and heads must be >= 1");
  if (r.shape.tokens != T)
    throw DataError(where(id, "attention.shape") + "token dimension " +
                    std::to_string(r.shape.tokens) + " != token count " + std::to_string(T));
  if (r.raw.size() != r.shape.size())
    throw DataError(where(id, "attention") + "shape mismatch: declared " +
                    std::to_string(r.shape.size()) + " values, payload has " +
                    std::to_string(r.raw.size()));

  r.attention.assign(r.raw.size(), 0.0);
  for (std::size_t l = 0; l < r.shape.layers; ++l) {
    for (std::size_t h = 0; h < r.shape.heads; ++h) {
      for (std::size_t i = 0; i < T; ++i) {
        const std::size_t base = ((l * r.shape.heads + h) * T + i) * T;
        double sum = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
          const double v = r.raw[base + j];
          if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowSumTolerance)
            throw DataError(where(id, "attention") + "value out of [0, 1] at layer " +
                            std::to_string(l) + ", head " + std::to_string(h) + ", row " +
                            std::to_string(i));
          sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          std::ostringstream msg;
          msg << where(id, "attention") << "row sum " << sum << " outside [1-" << kRowSumTolerance
              << ", 1+" << kRowSumTolerance << "] at layer " << l << ", head " << h << ", row "
              << i;
          throw DataError(msg.str());
        }
        for (std::size_t j = 0; j < T; ++j)
          r.attention[base + j] = r.raw[base + j] / sum;
      }
    }
  }
}

void Corpus::add(AttentionRecord record) {
  if (records_.empty()) {
    layers_ = record.shape.layers;
    heads_ = record.shape.heads;
  } else if (record.shape.layers != layers_ || record.shape.heads != heads_) {
    throw DataError(where(record.text_id, "attention.shape") + "has [" +
                    std::to_string(record.shape.layers) + ", " +
                    std::to_string(record.shape.heads) + "] layers/heads, corpus has [" +
                    std::to_string(layers_) + ", " + std::to_string(heads_) + "]");
  }
  if (!ids_.insert(record.text_id).second)
    throw DataError(where(record.text_id, "text_id") + "duplicate text_id");
  records_.push_back(std::move(record));
}

AttentionRecord parse_record(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object())
    throw DataError("record is not a JSON object");
  if (!obj.contains("text_id") || !obj["text_id"].is_string())
    throw DataError("record without a string text_id");

  AttentionRecord r;
  r.text_id = obj["text_id"].get<std::string>();
  const std::string_view id = r.text_id;
  if (obj.contains("label") && !obj["label"].is_null()) {
    if (!obj["label"].is_string())
      throw DataError(where(id, "label") + "must be a string");
    r.label = obj["label"].get<std::string>();
  }
  r.tokens = string_array(obj, "tokens", id);
  r.words = string_array(obj, "words", id);

  if (!obj.contains("word_ids") || !obj["word_ids"].is_array())
    throw DataError(where(id, "word_ids") + "missing or not an array");
  for (const auto& v : obj["word_ids"]) {
    if (v.is_null())
      r.word_ids.emplace_back(std::nullopt);
    else if (v.is_number_unsigned())
      r.word_ids.emplace_back(v.get<std::size_t>());
    else
      throw DataError(where(id, "word_ids") + "elements must be non-negative integers or null");
  }

  if (!obj.contains("attention") || !obj["attention"].is_object())
    throw DataError(where(id, "attention") + "missing or not an object");
  const json& att = obj["attention"];
  if (!att.contains("shape") || !att["shape"].is_array() || att["shape"].size() != 4)
    throw DataError(where(id, "attention.shape") + "must be [L, H, T, T]");
  std::array<std::size_t, 4> dims{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!att["shape"][k].is_number_unsigned())
      throw DataError(where(id, "attention.shape") + "dimensions must be non-negative integers");
    dims[k] = att["shape"][k].get<std::size_t>();
  }
  if (dims[2] != dims[3])
    throw DataError(where(id, "attention.shape") + "last two dimensions differ");
  r.shape = {dims[0], dims[1], dims[2]};

  const std::string encoding =
      att.contains("encoding") && att["encoding"].is_string() ? att["encoding"].get<std::string>()
                                                               : "";
  if (!att.contains("data"))
    throw DataError(where(id, "attention.data") + "missing");
  if (encoding == "f32le-base64") {
    if (!att["data"].is_string())
      throw DataError(where(id, "attention.data") + "must be a base64 string");
    std::vector<std::uint8_t> bytes;
    try {
      bytes = detail::base64_decode(att["data"].get_ref<const std::string&>());
    } catch (const DataError& e) {
      throw DataError(where(id, "attention.data") + e.what());
    }
    if (bytes.size() % 4 != 0)
      throw DataError(where(id, "attention.data") + "byte count not a multiple of 4");
    r.raw.resize(bytes.size() / 4);
    for (std::size_t k = 0; k < r.raw.size(); ++k)
      r.raw[k] = load_f32le(bytes.data() + 4 * k);
  } else if (encoding == "json") {
    flatten_json(att["data"], r.raw, id);
  } else {
    throw DataError(where(id, "attention.encoding") + "unknown encoding '" + encoding + "'");
  }

  finalize_record(r);
  return r;
}

std::string format_record(const AttentionRecord& r, AttentionEncoding encoding) {
  nlohmann::ordered_json obj;
  obj["text_id"] = r.text_id;
  if (r.label)
    obj["label"] = *r.label;
  obj["tokens"] = r.tokens;
  auto ids = nlohmann::ordered_json::array();
  for (const auto& w : r.word_ids) {
    if (w)
      ids.push_back(*w);
    else
      ids.push_back(nullptr);
  }
  obj["word_ids"] = std::move(ids);
  obj["words"] = r.words;

  nlohmann::ordered_json att;
  att["shape"] = {r.shape.layers, r.shape.heads, r.shape.tokens, r.shape.tokens};
  if (encoding == AttentionEncoding::F32Base64) {
    att["encoding"] = "f32le-base64";
    std::vector<std::uint8_t> bytes(r.raw.size() * 4);
    for (std::size_t k = 0; k < r.raw.size(); ++k)
      store_f32le(r.raw[k], bytes.data() + 4 * k);
    att["data"] = detail::base64_encode(bytes);
  } else {
    att["encoding"] = "json";
    auto data = nlohmann::ordered_json::array();
    const std::size_t T = r.shape.tokens;
    for (std::size_t l = 0; l < r.shape.layers; ++l) {
      auto layer = nlohmann::ordered_json::array();
      for (std::size_t h = 0; h < r.shape.heads; ++h) {
        auto head = nlohmann::ordered_json::array();
        const auto m = r.raw_matrix(l, h);
        for (std::size_t i = 0; i < T; ++i)
          head.push_back(std::vector<float>(m.begin() + i * T, m.begin() + (i + 1) * T));
        layer.push_back(std::move(head));
      }
      data.push_back(std::move(layer));
    }
    att["data"] = std::move(data);
  }
  obj["attention"] = std::move(att);
  return obj.dump();
}

Corpus read_corpus(std::istream& in, std::string_view source_name) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    try {
      corpus.add(parse_record(line));
    } catch (const DataError& e) {
      throw DataError(std::string(source_name) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad())
    throw DataError(std::string(source_name) + ": read failure");
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open corpus file " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(std::span<const AttentionRecord> records, const std::filesystem::path& path,
                  AttentionEncoding encoding) {
  // Validate on copies so nothing is written for an invalid corpus.
  Corpus check;
  for (const auto& r : records) {
    AttentionRecord copy = r;
    finalize_record(copy);
    check.add(std::move(copy));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& r : records)
    out << format_record(r, encoding) << '\n';
  out.flush();
  if (!out)
    throw DataError("write failure on " + path.string());
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                  AttentionEncoding encoding) {
  write_corpus(std::span<const AttentionRecord>(corpus.records()), path, encoding);
}

} // namespace attnlex
