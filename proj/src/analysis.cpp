#include "attnlex/analysis.hpp"

#include "attnlex/error.hpp"
#include "attnlex/word_aggregation.hpp"

namespace attnlex {

std::set<std::string> corpus_vocabulary(const Corpus& corpus) {
  std::set<std::string> vocab;
  for (const auto& r : corpus.records())
    vocab.insert(r.words.begin(), r.words.end());
  return vocab;
}

AnalysisResult analyze(const Corpus& corpus, const MergedLexicon& lexicon,
                       const AnalysisConfig& config) {
  if (corpus.empty())
    throw DataError("corpus has no records");
  if (config.trials < 2)
    throw UsageError("at least 2 trials are required for a significance test");

  AnalysisResult res;
  res.layer = config.layer.value_or(corpus.layers() - 1);
  if (res.layer >= corpus.layers())
    throw UsageError("layer " + std::to_string(res.layer) + " out of range; valid layers are 0.." +
                     std::to_string(corpus.layers() - 1));
  if (config.trials < kMinUsefulTrials)
    res.warnings.push_back("with " + std::to_string(config.trials) +
                           " trials a two-sided p-value below 0.05 is unattainable");

  const auto samples = aggregate_corpus(corpus, res.layer, {config.drop_special_rows});
  res.sample_count = samples.size();
  res.partition = partition_vocabulary(corpus_vocabulary(corpus), lexicon);
  if (res.partition.positive.empty())
    res.warnings.push_back("no positive words in the corpus; pos verdicts are NA");
  if (res.partition.negative.empty())
    res.warnings.push_back("no negative words in the corpus; neg verdicts are NA");

  res.plan = plan_trials(res.partition, config.trials, config.seed);
  res.histograms = build_histograms(samples, res.plan, res.partition, corpus.heads());
  res.distances = trial_distances(res.histograms, config.smoothing);
  res.summaries = average_distances(res.distances);
  res.means = exact_means(res.histograms);
  res.verdicts.corpus = config.corpus_name;
  res.verdicts.heads = assemble_verdicts(res.summaries, res.distances, res.means, config.alpha);
  return res;
}

} // namespace attnlex
