#include "attnlex/cli.hpp"

#include "attnlex/analysis.hpp"
#include "attnlex/error.hpp"
#include "attnlex/synth.hpp"
#include "attnlex/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace attnlex::cli {

namespace fs = std::filesystem;

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialisation failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0)
      EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

namespace {

struct MergeArgs {
  std::vector<std::string> sources;
  std::size_t min_sources = kDefaultMinSources;
  std::string out;
  std::string ties;
};

struct AnalyzeArgs {
  std::string corpus;
  std::string lexicon;
  std::vector<std::string> sources;
  std::size_t min_sources = kDefaultMinSources;
  long layer = -1;
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 0;
  double alpha = kDefaultAlpha;
  double smoothing = kDefaultSmoothing;
  std::string out_dir;
  std::string name;
  bool drop_special_rows = false;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

struct SynthArgs {
  SynthSpec spec;
  std::vector<std::size_t> biased_heads;
  std::string out_dir;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out)
    throw DataError("write failure on " + path.string());
}

std::vector<SourceLexicon> load_sources(const std::vector<std::string>& paths, std::ostream& err) {
  std::vector<SourceLexicon> sources;
  for (const auto& p : paths) {
    auto load = read_source_lexicon(fs::path(p));
    if (!load.dropped_multiword.empty())
      err << "warning: " << p << ": dropped " << load.dropped_multiword.size()
          << " multiword entries\n";
    if (!load.duplicates.empty())
      err << "warning: " << p << ": " << load.duplicates.size() << " repeated entries ignored\n";
    sources.push_back(std::move(load.lexicon));
  }
  return sources;
}

int cmd_merge(const MergeArgs& a, std::ostream& out, std::ostream& err) {
  const auto sources = load_sources(a.sources, err);
  const auto result = merge_lexicons(sources, a.min_sources);
  const fs::path out_path(a.out);
  const fs::path ties_path = a.ties.empty() ? fs::path(a.out + ".ties.tsv") : fs::path(a.ties);
  write_merged_lexicon(result.lexicon, out_path);
  write_tie_report(result.ties, ties_path);
  if (!result.ties.empty())
    err << "warning: " << result.ties.size() << " lemmas excluded for tied polarity (see "
        << ties_path.string() << ")\n";
  const auto stats = lexicon_stats(result.lexicon);
  out << format_stats_table(stats, out_path.filename().string());
  out << "stats: " << format_stats_line(stats) << "\n";
  return kOk;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.lexicon.empty() == a.sources.empty())
    throw UsageError("give either --lexicon or one or more --source files");

  const Corpus corpus = read_corpus(fs::path(a.corpus));
  MergedLexicon lexicon;
  std::vector<PolarityTie> ties;
  if (!a.lexicon.empty()) {
    lexicon = read_merged_lexicon(fs::path(a.lexicon));
  } else {
    auto merged = merge_lexicons(load_sources(a.sources, err), a.min_sources);
    lexicon = std::move(merged.lexicon);
    ties = std::move(merged.ties);
  }

  AnalysisConfig cfg;
  if (a.layer >= 0)
    cfg.layer = static_cast<std::size_t>(a.layer);
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.alpha = a.alpha;
  cfg.smoothing = a.smoothing;
  cfg.drop_special_rows = a.drop_special_rows;
  cfg.corpus_name = a.name.empty() ? fs::path(a.corpus).stem().string() : a.name;
  const AnalysisResult res = analyze(corpus, lexicon, cfg);
  for (const auto& w : res.warnings)
    err << "warning: " << w << "\n";

  std::ostringstream verdicts;
  write_verdict_tsv(res.verdicts, verdicts);
  verdicts << "# distances: Kullback-Leibler in bits, additive smoothing " << a.smoothing
           << " per bin\n";
  std::ostringstream hist;
  write_histogram_csv(res.histograms, hist);

  nlohmann::ordered_json meta;
  meta["tool"] = "attnlex";
  meta["version"] = kVersion;
  meta["timestamp"] = utc_timestamp();
  nlohmann::ordered_json params;
  params["corpus_name"] = cfg.corpus_name;
  params["layer"] = res.layer;
  params["trials"] = cfg.trials;
  params["seed"] = cfg.seed;
  params["alpha"] = cfg.alpha;
  params["smoothing"] = cfg.smoothing;
  params["log_base"] = 2;
  params["drop_special_rows"] = cfg.drop_special_rows;
  params["min_sources"] = a.sources.empty() ? nlohmann::ordered_json(nullptr)
                                            : nlohmann::ordered_json(a.min_sources);
  meta["parameters"] = std::move(params);
  nlohmann::ordered_json inputs;
  inputs["corpus"] = {{"path", a.corpus}, {"sha256", file_sha256(a.corpus)}};
  auto lex_inputs = nlohmann::ordered_json::array();
  for (const auto& p : a.lexicon.empty() ? a.sources : std::vector<std::string>{a.lexicon})
    lex_inputs.push_back({{"path", p}, {"sha256", file_sha256(p)}});
  inputs["lexicons"] = std::move(lex_inputs);
  meta["inputs"] = std::move(inputs);
  nlohmann::ordered_json counts;
  counts["records"] = corpus.size();
  counts["layers"] = corpus.layers();
  counts["heads"] = corpus.heads();
  counts["samples"] = res.sample_count;
  counts["positive_words"] = res.partition.positive.size();
  counts["negative_words"] = res.partition.negative.size();
  counts["sentiment_words"] = res.partition.sentiment.size();
  counts["neutral_words"] = res.partition.neutral.size();
  counts["tied_lemmas"] = ties.size();
  meta["counts"] = std::move(counts);
  meta["warnings"] = res.warnings;

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const std::vector<std::pair<fs::path, std::string>> files = {
      {dir / "verdicts.tsv", verdicts.str()},
      {dir / "histograms.csv", hist.str()},
      {dir / "metadata.json", meta.dump(2) + "\n"}};
  try {
    for (const auto& [path, text] : files)
      write_text(path, text);
  } catch (...) {
    std::error_code ec;
    for (const auto& [path, text] : files)
      fs::remove(path, ec);
    throw;
  }

  const auto summary = summarize_table(std::span<const CorpusVerdicts>(&res.verdicts, 1));
  const auto& cs = summary.corpora.front();
  out << "++ heads: sent=" << cs.plus_plus[0] << " pos=" << cs.plus_plus[1]
      << " neg=" << cs.plus_plus[2] << "\n"
      << "wrote " << files[0].first.string() << ", " << files[1].first.string() << ", "
      << files[2].first.string() << "\n";
  return kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<CorpusVerdicts> all;
  for (const auto& p : a.inputs) {
    std::ifstream in(p);
    if (!in)
      throw DataError("cannot open verdict file " + p);
    for (auto& cv : read_verdict_tsv(in, p))
      all.push_back(std::move(cv));
  }
  if (all.empty())
    throw DataError("verdict files contain no rows");
  const std::string table = render_table(all);
  if (a.out.empty())
    out << table;
  else
    write_text(a.out, table);
  return kOk;
}

int cmd_synth(SynthArgs a, std::ostream& out) {
  if (!a.biased_heads.empty())
    a.spec.biased_heads = a.biased_heads;
  const auto corpus = generate(a.spec);
  const auto paths = write_synth(a.spec, corpus, a.out_dir);
  out << "wrote " << paths.corpus.string() << ", " << paths.lexicon.string() << ", "
      << paths.manifest.string() << "\n";
  return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentiment-lexicon attention analysis for transformer attention heads"};
  app.name(args.empty() ? "attnlex" : args.front());
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  MergeArgs merge;
  auto* merge_cmd = app.add_subcommand("merge-lexicon", "Merge source sentiment lexicons");
  merge_cmd->add_option("sources", merge.sources, "Source lexicon TSV files (lemma<TAB>polarity)")
      ->required()
      ->check(CLI::ExistingFile);
  merge_cmd
      ->add_option("-N,--min-sources", merge.min_sources,
                   "Keep lemmas present in at least this many sources")
      ->capture_default_str();
  merge_cmd->add_option("-o,--out", merge.out, "Merged lexicon TSV output")->required();
  merge_cmd->add_option("--ties", merge.ties, "Tie report output (default <out>.ties.tsv)");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Run the attention analysis on one corpus");
  an_cmd->add_option("-c,--corpus", an.corpus, "ATNX corpus file")
      ->required()
      ->check(CLI::ExistingFile);
  an_cmd->add_option("-l,--lexicon", an.lexicon, "Merged lexicon TSV")->check(CLI::ExistingFile);
  an_cmd->add_option("--source", an.sources, "Source lexicon TSV to merge on the fly (repeatable)")
      ->check(CLI::ExistingFile);
  an_cmd->add_option("-N,--min-sources", an.min_sources, "Merge threshold for --source files")
      ->capture_default_str();
  an_cmd->add_option("--layer", an.layer, "Layer index (default: last layer)");
  an_cmd->add_option("-R,--trials", an.trials, "Random neutral subsets per head")
      ->capture_default_str();
  an_cmd->add_option("--seed", an.seed, "Seed for neutral subset sampling")->required();
  an_cmd->add_option("--alpha", an.alpha, "Significance level")->capture_default_str();
  an_cmd->add_option("--smoothing", an.smoothing, "Additive smoothing per histogram bin")
      ->capture_default_str();
  an_cmd->add_option("-o,--out-dir", an.out_dir, "Output directory")->required();
  an_cmd->add_option("--name", an.name, "Corpus name in reports (default: corpus file stem)");
  an_cmd->add_flag("--drop-special-rows", an.drop_special_rows,
                   "Exclude special-token rows from received-attention means");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Render verdict files as one sign table");
  rep_cmd->add_option("verdicts", rep.inputs, "Verdict TSV files")
      ->required()
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("-o,--out", rep.out, "Write the table here instead of stdout");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted bias");
  syn_cmd->add_option("--vocabulary", syn.spec.vocabulary, "Vocabulary size")
      ->capture_default_str();
  syn_cmd->add_option("--marked", syn.spec.marked, "Marked (lexicon) words")
      ->capture_default_str();
  syn_cmd->add_option("--texts", syn.spec.texts, "Number of texts")->capture_default_str();
  syn_cmd->add_option("--min-tokens", syn.spec.min_tokens, "Minimum tokens per text")
      ->capture_default_str();
  syn_cmd->add_option("--max-tokens", syn.spec.max_tokens, "Maximum tokens per text")
      ->capture_default_str();
  syn_cmd->add_option("--heads", syn.spec.heads, "Heads per layer")->capture_default_str();
  syn_cmd->add_option("--layers", syn.spec.layers, "Layers")->capture_default_str();
  syn_cmd->add_option("--bias", syn.spec.bias, "Attention mass added to marked-word columns")
      ->capture_default_str();
  syn_cmd->add_option("--split", syn.spec.split_probability, "Subword split probability")
      ->capture_default_str();
  syn_cmd->add_option("--biased-heads", syn.biased_heads, "Biased heads (default: all)");
  syn_cmd->add_option("--seed", syn.spec.seed, "Generator seed")->required();
  syn_cmd->add_option("-o,--out-dir", syn.out_dir, "Output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*merge_cmd)
      return cmd_merge(merge, out, err);
    if (*an_cmd)
      return cmd_analyze(an, out, err);
    if (*rep_cmd)
      return cmd_report(rep, out);
    if (*syn_cmd)
      return cmd_synth(syn, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace attnlex::cli
