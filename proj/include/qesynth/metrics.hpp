#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qesynth/align.hpp"

namespace qe {

/// Binary confusion counts with BAD as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Matthews correlation coefficient. Returns 0 whenever any marginal is
/// empty (the usual convention for the degenerate denominator); throws on
/// all-zero counts.
double mcc(const ConfusionCounts& counts);

/// F1 with the chosen class as positive; 0 when precision + recall is 0.
double f1(const ConfusionCounts& counts, Tag positive = Tag::BAD);

struct CategoryScores {
  ConfusionCounts counts;
  double mcc = 0.0;
  double f1_ok = 0.0;
  double f1_bad = 0.0;
};

/// Pooled word-level scores. `combined` flattens each record into its
/// 2T+1 alternating gap/word sequence and is the headline number; the
/// per-category breakdowns mirror how word and gap badness behave
/// differently in practice.
struct WordLevelReport {
  CategoryScores combined;
  CategoryScores word;
  CategoryScores gap;
};

/// Counts are pooled over all records (micro-averaged). Throws if a
/// record's shape differs between pred and gold, naming the record.
WordLevelReport evaluate_word_level(const std::vector<TagSequence>& pred,
                                    const std::vector<TagSequence>& gold);

struct SentenceLevelReport {
  /// Sample Pearson correlation; absent when either side has zero
  /// variance, in which case MAE/RMSE are still meaningful.
  std::optional<double> pearson;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

/// Requires at least two aligned prediction/gold pairs.
SentenceLevelReport evaluate_sentence_level(const std::vector<double>& pred,
                                            const std::vector<double>& gold);

/// One line per record: space-separated OK/BAD in 2T+1 gap/word
/// alternation, the same layout `.tags` files use.
std::vector<TagSequence> read_tag_file(const std::string& path);

/// One finite real per line.
std::vector<double> read_score_file(const std::string& path);

std::string render_text(const WordLevelReport& report);
std::string render_text(const SentenceLevelReport& report);
nlohmann::ordered_json to_json(const WordLevelReport& report);
nlohmann::ordered_json to_json(const SentenceLevelReport& report);

}  // namespace qe
