#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qesynth/align.hpp"

namespace qe {

/// Per-record probabilities of BAD, in the same gap/word layout as tags:
/// T word slots and T+1 gap slots.
struct WordProbSequence {
  std::vector<double> gap_probs;
  std::vector<double> word_probs;

  bool operator==(const WordProbSequence&) const = default;
};

struct EnsembleWeights {
  double w = 0.5;  // weight on stream A; stream B gets 1 - w
  double decision_threshold = 0.5;
};

/// Throws unless w is in [0,1] and the threshold in (0,1).
void validate(const EnsembleWeights& weights);

/// BAD iff probability >= threshold, so exact ties go to BAD.
TagSequence threshold_tags(const WordProbSequence& probs, double threshold);

/// Elementwise w·a + (1−w)·b plus the thresholded tags. With w = 1 the
/// combined probabilities equal stream A bitwise.
std::pair<WordProbSequence, TagSequence> combine_word(const WordProbSequence& a,
                                                      const WordProbSequence& b,
                                                      const EnsembleWeights& weights);

/// w·a + (1−w)·b; clamped to [0,1] by default since sentence scores are
/// HTER-like. Throws on non-finite input.
double combine_sentence(double a, double b, const EnsembleWeights& weights,
                        bool clamp = true);

/// Grid-searches w over {0, 0.05, …, 1.0} maximizing combined-category MCC
/// of the thresholded combination against gold; ties break toward 0.5.
EnsembleWeights fit_weight_word(const std::vector<WordProbSequence>& a,
                                const std::vector<WordProbSequence>& b,
                                const std::vector<TagSequence>& gold,
                                double decision_threshold = 0.5);

/// Same grid search maximizing Pearson correlation against gold scores.
EnsembleWeights fit_weight_sentence(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& gold);

/// One record per line: space-separated reals in [0,1], 2T+1 of them in
/// gap,word,…,gap alternation. Serialized with six fixed decimals.
std::vector<WordProbSequence> read_word_prob_file(const std::string& path);
void write_word_prob_file(const std::vector<WordProbSequence>& records,
                          const std::string& path);

/// One score per line, six fixed decimals.
void write_score_file(const std::vector<double>& scores, const std::string& path);

}  // namespace qe
