#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qesynth/align.hpp"

namespace qe {

/// Default margin-score gate for mined pairs.
inline constexpr double kDefaultMarginThreshold = 1.06;

/// A mined (source, target) sentence pair. `score_text` keeps the original
/// bytes of the score field so filtered output can echo input lines
/// unchanged.
struct BitextPair {
  std::string source;
  std::string target;
  std::optional<double> margin_score;
  std::string score_text;

  bool operator==(const BitextPair&) const = default;
};

enum class BitextFormat { Tsv };

BitextFormat bitext_format_from_name(std::string_view name);

struct RejectedLine {
  std::size_t line;  // 1-based
  std::string reason;
};

/// Parses `source<TAB>target[<TAB>score]` records, one per line, UTF-8.
/// With `rejects == nullptr` the first malformed record throws ParseError;
/// otherwise malformed records are collected there and parsing continues.
std::vector<BitextPair> parse_bitext(std::istream& in, BitextFormat format,
                                     std::vector<RejectedLine>* rejects = nullptr);

void write_bitext(std::ostream& out, const std::vector<BitextPair>& pairs);

struct FilterResult {
  std::vector<BitextPair> kept;
  std::size_t unscored = 0;         // excluded for lack of a margin score
  std::size_t below_threshold = 0;  // excluded by the gate
};

/// Keeps pairs whose margin score is present and >= threshold, in order.
FilterResult filter_by_margin(const std::vector<BitextPair>& pairs,
                              double threshold = kDefaultMarginThreshold);

enum class TokenizerProfile {
  SpaceDelimited,  // whitespace split + terminal punctuation detachment
  Cjk,             // one token per Han/Kana/Hangul codepoint, Latin/digit runs grouped
  Pretokenized,    // whitespace split only
};

TokenizerProfile tokenizer_profile_from_name(std::string_view name);
const char* tokenizer_profile_name(TokenizerProfile profile);

/// Deterministic tokenization; throws on empty or whitespace-only input.
Tokens tokenize(const std::string& text, TokenizerProfile profile);

enum class Route { Nmt, Mlm };

Route route_from_name(std::string_view name);
const char* route_name(Route route);

enum class ScoringMode { Hter, BadFraction };

ScoringMode scoring_mode_from_name(std::string_view name);
const char* scoring_mode_name(ScoringMode mode);

/// One synthesized training record. `pseudo_post_edit` is empty when the
/// record was read from a dataset without a `.pe` file; `route` is unset
/// unless the provenance sidecar supplied one.
struct QEExample {
  Tokens source;
  Tokens hypothesis;
  Tokens pseudo_post_edit;
  TagSequence tags;
  double sentence_score = 0.0;
  std::optional<Route> route;

  bool operator==(const QEExample&) const = default;
};

struct QEDataset {
  std::vector<QEExample> records;
  std::string provenance;
  /// Sidecar payload (route, seed, corruption config, ...). Written to
  /// `<prefix>.meta.jsonl` when non-null.
  nlohmann::ordered_json meta;
};

struct StatsReport {
  std::size_t size = 0;
  double mt_bad_pct = 0.0;
  double gap_bad_pct = 0.0;
};

/// Record count plus BAD percentages over all word and all gap positions.
StatsReport corpus_stats(const QEDataset& dataset);

/// Uniform sample without replacement of exactly n records; original
/// relative order is preserved and the result depends only on (dataset, n,
/// seed).
QEDataset subsample(const QEDataset& dataset, std::size_t n, std::uint64_t seed);

/// On-disk dataset layout: four parallel files `<prefix>.src`, `.mt`,
/// `.tags` (2T+1 alternating gap,word,...,gap tokens) and `.hter` (one
/// six-decimal score per line), plus `.pe` when pseudo post-edits are
/// available and `.meta.jsonl` when the dataset carries sidecar metadata.
void write_dataset(const QEDataset& dataset, const std::string& prefix);

QEDataset read_dataset(const std::string& prefix);

}  // namespace qe
