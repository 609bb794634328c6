#include "attnlex/analysis.hpp"
#include "attnlex/atnx.hpp"
#include "attnlex/divergence.hpp"
#include "attnlex/error.hpp"
#include "attnlex/lexicon.hpp"
#include "attnlex/synth.hpp"
#include "attnlex/verdict.hpp"
#include "attnlex/version.hpp"
#include "attnlex/word_aggregation.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace attnlex;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<WordId> to_word_ids(const std::vector<std::optional<std::size_t>>& ids) {
  return {ids.begin(), ids.end()};
}

WordAttentionMatrix collapse(const Array& matrix, const std::vector<std::optional<std::size_t>>& ids) {
  if (matrix.ndim() != 2 || matrix.shape(0) != matrix.shape(1))
    throw UsageError("attention matrix must be square");
  const auto word_ids = to_word_ids(ids);
  return collapse_tokens({matrix.data(), static_cast<std::size_t>(matrix.size())}, word_ids);
}

py::dict verdict_dict(const std::string& corpus, std::size_t head, SentimentSet set,
                      const SetVerdict& v) {
  py::dict d;
  d["corpus"] = corpus;
  d["head"] = head;
  d["set"] = std::string(to_string(set));
  d["D_mean_set"] = v.d_mean_set;
  d["D_mean_e"] = v.d_mean_e;
  d["p_value"] = v.p_value;
  d["mean_attn_set"] = v.mean_attn_set;
  d["mean_attn_e"] = v.mean_attn_e;
  d["verdict"] = v.signs();
  return d;
}

MergedLexicon lexicon_from(const std::map<std::string, std::string>& entries) {
  MergedLexicon lex;
  for (const auto& [lemma, pol] : entries)
    lex.entries[lemma] = {parse_polarity(pol), 1};
  return lex;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attention-to-lexicon analysis core";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  m.def(
      "collapse_tokens",
      [](const Array& matrix, const std::vector<std::optional<std::size_t>>& word_ids) {
        const auto wm = collapse(matrix, word_ids);
        Array out({wm.size(), wm.size()});
        std::copy(wm.values.begin(), wm.values.end(), out.mutable_data());
        return out;
      },
      py::arg("matrix"), py::arg("word_ids"),
      "Token matrix (T x T) to word matrix: sum columns per group, average rows per group. "
      "word_ids holds a word index per token, or None for special tokens.");

  m.def(
      "received_attention",
      [](const Array& matrix, const std::vector<std::optional<std::size_t>>& word_ids,
         bool drop_special_rows) {
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& r : received_attention(collapse(matrix, word_ids), drop_special_rows))
          out.emplace_back(r.word, r.weight);
        return out;
      },
      py::arg("matrix"), py::arg("word_ids"), py::arg("drop_special_rows") = false,
      "List of (word index, received weight) for the non-special words of one head.");

  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        if (p.size() != q.size())
          throw UsageError("distributions differ in length");
        return kl_divergence(p, q);
      },
      py::arg("p"), py::arg("q"), "D(P||Q) in bits.");

  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = wilcoxon_signed_rank(x, y);
        py::dict d;
        d["statistic"] = r.statistic;
        d["w_plus"] = r.w_plus;
        d["w_minus"] = r.w_minus;
        d["p_value"] = r.p_value;
        d["effective_n"] = r.effective_n;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("x"), py::arg("y"), "Two-sided paired signed-rank test.");

  m.def(
      "merge_lexicons",
      [](const std::map<std::string, std::map<std::string, std::string>>& sources,
         std::size_t min_sources) {
        std::vector<SourceLexicon> srcs;
        for (const auto& [name, entries] : sources) {
          SourceLexicon s;
          s.name = name;
          for (const auto& [lemma, pol] : entries)
            s.entries[lemma] = parse_polarity(pol);
          srcs.push_back(std::move(s));
        }
        const auto res = merge_lexicons(srcs, min_sources);
        std::map<std::string, std::pair<std::string, std::size_t>> merged;
        for (const auto& [lemma, e] : res.lexicon.entries)
          merged[lemma] = {std::string(to_string(e.polarity)), e.source_count};
        std::vector<std::tuple<std::string, std::size_t, std::size_t>> ties;
        for (const auto& t : res.ties)
          ties.emplace_back(t.lemma, t.positive, t.negative);
        return py::make_tuple(merged, ties);
      },
      py::arg("sources"), py::arg("min_sources") = kDefaultMinSources,
      "sources: {name: {lemma: 'positive'|'negative'}}. Returns "
      "({lemma: (polarity, source_count)}, [(lemma, positive, negative)]) for exact ties.");

  m.def(
      "lexicon_stats",
      [](const std::map<std::string, std::string>& lexicon) {
        return format_stats_line(lexicon_stats(lexicon_from(lexicon)));
      },
      py::arg("lexicon"), "Stats line 'total, pos (x%), neg (y%)' for {lemma: polarity}.");

  m.def(
      "analyze",
      [](const std::filesystem::path& corpus_path, const std::filesystem::path& lexicon_path,
         std::uint64_t seed, std::size_t trials, std::optional<std::size_t> layer, double alpha,
         double smoothing, bool drop_special_rows, std::string name) {
        const auto corpus = read_corpus(corpus_path);
        const auto lexicon = read_merged_lexicon(lexicon_path);
        AnalysisConfig cfg;
        cfg.layer = layer;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.alpha = alpha;
        cfg.smoothing = smoothing;
        cfg.drop_special_rows = drop_special_rows;
        cfg.corpus_name = name.empty() ? corpus_path.stem().string() : name;
        AnalysisResult res;
        {
          py::gil_scoped_release release;
          res = analyze(corpus, lexicon, cfg);
        }
        py::list rows;
        for (const auto& hv : res.verdicts.heads)
          for (auto set : kSentimentSets)
            rows.append(verdict_dict(res.verdicts.corpus, hv.head, set, hv[set]));
        py::dict d;
        d["layer"] = res.layer;
        d["sample_count"] = res.sample_count;
        d["positive_words"] = res.partition.positive.size();
        d["negative_words"] = res.partition.negative.size();
        d["neutral_words"] = res.partition.neutral.size();
        d["warnings"] = res.warnings;
        d["verdicts"] = rows;
        std::ostringstream tsv;
        write_verdict_tsv(res.verdicts, tsv);
        d["verdict_tsv"] = tsv.str();
        return d;
      },
      py::arg("corpus"), py::arg("lexicon"), py::arg("seed"), py::arg("trials") = kDefaultTrials,
      py::arg("layer") = py::none(), py::arg("alpha") = kDefaultAlpha,
      py::arg("smoothing") = kDefaultSmoothing, py::arg("drop_special_rows") = false,
      py::arg("name") = "",
      "Runs the full analysis on an ATNX corpus and a merged lexicon TSV.");

  m.def(
      "render_table",
      [](const std::vector<std::string>& verdict_tsvs) {
        std::vector<CorpusVerdicts> all;
        for (const auto& text : verdict_tsvs) {
          std::istringstream in(text);
          for (auto& cv : read_verdict_tsv(in))
            all.push_back(std::move(cv));
        }
        return render_table(all);
      },
      py::arg("verdict_tsvs"), "Sign table from verdict TSV contents (strings, not paths).");

  m.def(
      "generate_synthetic",
      [](const std::filesystem::path& out_dir, std::uint64_t seed, std::size_t vocabulary,
         std::size_t marked, std::size_t texts, std::size_t heads, std::size_t layers, double bias,
         double split_probability, std::optional<std::vector<std::size_t>> biased_heads) {
        SynthSpec spec;
        spec.seed = seed;
        spec.vocabulary = vocabulary;
        spec.marked = marked;
        spec.texts = texts;
        spec.heads = heads;
        spec.layers = layers;
        spec.bias = bias;
        spec.split_probability = split_probability;
        spec.biased_heads = std::move(biased_heads);
        const auto paths = write_synth(spec, generate(spec), out_dir);
        py::dict d;
        d["corpus"] = paths.corpus;
        d["lexicon"] = paths.lexicon;
        d["manifest"] = paths.manifest;
        return d;
      },
      py::arg("out_dir"), py::arg("seed"), py::arg("vocabulary") = 200, py::arg("marked") = 20,
      py::arg("texts") = 200, py::arg("heads") = 12, py::arg("layers") = 1,
      py::arg("bias") = 0.05, py::arg("split_probability") = 0.3,
      py::arg("biased_heads") = py::none(),
      "Writes corpus.atnx, lexicon.tsv and manifest.json; returns their paths.");
}
