#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qesynth/corpus.hpp"
#include "qesynth/rng.hpp"

namespace qe {

class Infiller;

/// Literal mask placeholder used in drafts and on the infill wire format.
inline constexpr const char* kMaskToken = "<mask>";

/// Knobs for reference corruption. Defaults: 0.15 is the customary
/// masked-LM rate; deletion/insertion rates are deliberately light and
/// meant to be tuned against the tag statistics of the output.
struct CorruptionConfig {
  double p_sub = 0.15;
  double p_del = 0.05;
  double p_ins = 0.05;
  double span_mean = 1.0;  // Poisson mean for span lengths, shifted by one
  std::uint64_t seed = 0;
};

/// Throws unless probabilities are in [0,1] and span_mean is positive.
void validate(const CorruptionConfig& config);

/// One slot of a corrupted draft: either a surviving token or a mask.
/// `origin` is the token's index in the uncorrupted reference; inserted
/// masks have none.
struct DraftElement {
  bool is_mask = false;
  std::string text;  // kMaskToken for masks
  std::optional<std::size_t> origin;

  bool operator==(const DraftElement&) const = default;
};

struct MaskedDraft {
  std::vector<DraftElement> elements;
  Tokens original;  // reference the draft was corrupted from
  std::size_t deletion_count = 0;

  std::size_t mask_count() const;
};

/// Poisson(span_mean) + 1, so spans are never empty.
std::size_t sample_span_length(RandomStream& rng, double span_mean = 1.0);

/// Corrupts a reference in three passes: masks each token with p_sub,
/// deletes spans seeded by per-position marks drawn with p_del, then
/// inserts mask runs at gaps (sentence boundaries included) marked with
/// p_ins. Span lengths follow sample_span_length; deletion spans truncate
/// at the sentence end and marks inside an already-deleted span are void.
/// If everything was deleted and no insertion fired, one mask run is
/// forced so the draft is never empty.
MaskedDraft corrupt(const Tokens& target, const CorruptionConfig& config,
                    RandomStream& rng);

struct SynthOptions {
  ScoringMode scoring = ScoringMode::Hter;
  TokenizerProfile profile = TokenizerProfile::Pretokenized;
  unsigned jobs = 1;
};

/// Builds QE records by aligning externally produced translations against
/// the mined targets. `hypotheses[i]` must be the translation of
/// `pairs[i]`; all three sides are tokenized with `options.profile`.
///
/// With `skipped == nullptr` the first bad record (empty hypothesis,
/// untokenizable pair) aborts with an error naming it; otherwise bad
/// records are dropped and reported there, `line` holding the 1-based
/// record number.
QEDataset synth_from_hypotheses(const std::vector<BitextPair>& pairs,
                                const std::vector<std::string>& hypotheses,
                                const SynthOptions& options,
                                std::vector<RejectedLine>* skipped = nullptr);

/// Builds QE records by corrupting each target, letting `infiller` rewrite
/// the masks, and aligning the rewrite against the original target.
///
/// Each record draws from its own RNG substream keyed by (config.seed,
/// record index), so the output is byte-identical for any `options.jobs`.
/// Infiller failures follow the same abort-or-skip policy as above.
QEDataset synth_by_rewriting(const std::vector<BitextPair>& pairs,
                             const CorruptionConfig& config, const Infiller& infiller,
                             const SynthOptions& options,
                             std::vector<RejectedLine>* skipped = nullptr);

}  // namespace qe
