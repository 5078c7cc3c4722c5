#include "qesynth/ensemble.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qesynth/error.hpp"
#include "qesynth/metrics.hpp"

namespace qe {

namespace {

constexpr int kGridSteps = 20;  // w in {0, 0.05, ..., 1.0}

std::string format_prob(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

double combine_one(double a, double b, double w) { return w * a + (1.0 - w) * b; }

// Strictly-better-or-preferred-tie comparison for the grid search: higher
// objective wins; on equal objective the w closer to 0.5 wins; exact
// mirror ties resolve to the smaller w.
bool improves(double objective, double w, double best_objective, double best_w) {
  if (objective != best_objective) return objective > best_objective;
  const double d = std::abs(w - 0.5), best_d = std::abs(best_w - 0.5);
  if (d != best_d) return d < best_d;
  return w < best_w;
}

}  // namespace

void validate(const EnsembleWeights& weights) {
  if (!(weights.w >= 0.0 && weights.w <= 1.0)) {
    throw Error("ensemble weight must be in [0, 1]");
  }
  if (!(weights.decision_threshold > 0.0 && weights.decision_threshold < 1.0)) {
    throw Error("decision threshold must be in (0, 1)");
  }
}

TagSequence threshold_tags(const WordProbSequence& probs, double threshold) {
  TagSequence tags;
  tags.word_tags.reserve(probs.word_probs.size());
  tags.gap_tags.reserve(probs.gap_probs.size());
  for (const double p : probs.word_probs) {
    tags.word_tags.push_back(p >= threshold ? Tag::BAD : Tag::OK);
  }
  for (const double p : probs.gap_probs) {
    tags.gap_tags.push_back(p >= threshold ? Tag::BAD : Tag::OK);
  }
  return tags;
}

std::pair<WordProbSequence, TagSequence> combine_word(const WordProbSequence& a,
                                                      const WordProbSequence& b,
                                                      const EnsembleWeights& weights) {
  validate(weights);
  if (a.word_probs.size() != b.word_probs.size() ||
      a.gap_probs.size() != b.gap_probs.size()) {
    throw Error("probability streams have mismatched shapes (" +
                std::to_string(a.word_probs.size()) + "w/" +
                std::to_string(a.gap_probs.size()) + "g vs " +
                std::to_string(b.word_probs.size()) + "w/" +
                std::to_string(b.gap_probs.size()) + "g)");
  }
  WordProbSequence combined;
  combined.word_probs.reserve(a.word_probs.size());
  combined.gap_probs.reserve(a.gap_probs.size());
  for (std::size_t i = 0; i < a.word_probs.size(); ++i) {
    combined.word_probs.push_back(combine_one(a.word_probs[i], b.word_probs[i], weights.w));
  }
  for (std::size_t i = 0; i < a.gap_probs.size(); ++i) {
    combined.gap_probs.push_back(combine_one(a.gap_probs[i], b.gap_probs[i], weights.w));
  }
  TagSequence tags = threshold_tags(combined, weights.decision_threshold);
  return {std::move(combined), std::move(tags)};
}

double combine_sentence(double a, double b, const EnsembleWeights& weights,
                        bool clamp) {
  validate(weights);
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error("sentence scores must be finite");
  }
  double combined = combine_one(a, b, weights.w);
  if (clamp) combined = std::min(1.0, std::max(0.0, combined));
  return combined;
}

EnsembleWeights fit_weight_word(const std::vector<WordProbSequence>& a,
                                const std::vector<WordProbSequence>& b,
                                const std::vector<TagSequence>& gold,
                                double decision_threshold) {
  if (a.empty()) throw Error("fit_weight: empty dev set");
  if (a.size() != b.size() || a.size() != gold.size()) {
    throw Error("fit_weight: dev streams have " + std::to_string(a.size()) + ", " +
                std::to_string(b.size()) + " and " + std::to_string(gold.size()) +
                " records");
  }
  EnsembleWeights best{0.5, decision_threshold};
  double best_objective = 0.0;
  bool have_best = false;
  for (int step = 0; step <= kGridSteps; ++step) {
    EnsembleWeights candidate{static_cast<double>(step) / kGridSteps,
                              decision_threshold};
    std::vector<TagSequence> pred;
    pred.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      pred.push_back(combine_word(a[i], b[i], candidate).second);
    }
    const double objective = evaluate_word_level(pred, gold).combined.mcc;
    if (!have_best || improves(objective, candidate.w, best_objective, best.w)) {
      have_best = true;
      best_objective = objective;
      best = candidate;
    }
  }
  return best;
}

EnsembleWeights fit_weight_sentence(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& gold) {
  if (a.empty()) throw Error("fit_weight: empty dev set");
  if (a.size() != b.size() || a.size() != gold.size()) {
    throw Error("fit_weight: dev streams have " + std::to_string(a.size()) + ", " +
                std::to_string(b.size()) + " and " + std::to_string(gold.size()) +
                " records");
  }
  EnsembleWeights best{0.5, 0.5};
  double best_objective = 0.0;
  bool have_best = false;
  for (int step = 0; step <= kGridSteps; ++step) {
    EnsembleWeights candidate{static_cast<double>(step) / kGridSteps, 0.5};
    std::vector<double> pred;
    pred.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      pred.push_back(combine_sentence(a[i], b[i], candidate));
    }
    const auto report = evaluate_sentence_level(pred, gold);
    if (!report.pearson) continue;  // degenerate mix, e.g. constant predictions
    if (!have_best || improves(*report.pearson, candidate.w, best_objective, best.w)) {
      have_best = true;
      best_objective = *report.pearson;
      best = candidate;
    }
  }
  if (!have_best) {
    throw Error("fit_weight: Pearson undefined at every grid point "
                "(constant predictions or constant gold)");
  }
  return best;
}

std::vector<WordProbSequence> read_word_prob_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<WordProbSequence> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> values;
    const char* cursor = line.data();
    const char* end = line.data() + line.size();
    while (cursor != end) {
      if (*cursor == ' ' || *cursor == '\t') {
        ++cursor;
        continue;
      }
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cursor, end, value);
      if (ec != std::errc() || ptr == cursor) {
        throw ParseError("expected a real number in " + path, lineno);
      }
      if (!(value >= 0.0 && value <= 1.0)) {
        throw ParseError("probability out of [0, 1] in " + path, lineno);
      }
      values.push_back(value);
      cursor = ptr;
    }
    if (values.empty() || values.size() % 2 == 0) {
      throw ParseError("expected an odd number of gap/word probabilities in " +
                           path + ", got " + std::to_string(values.size()),
                       lineno);
    }
    WordProbSequence record;
    for (std::size_t i = 0; i < values.size(); ++i) {
      (i % 2 == 0 ? record.gap_probs : record.word_probs).push_back(values[i]);
    }
    records.push_back(std::move(record));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return records;
}

void write_word_prob_file(const std::vector<WordProbSequence>& records,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const WordProbSequence& record : records) {
    if (record.gap_probs.size() != record.word_probs.size() + 1) {
      throw Error("word probability record must have T words and T+1 gaps");
    }
    std::string line;
    for (std::size_t t = 0; t < record.word_probs.size(); ++t) {
      line += format_prob(record.gap_probs[t]);
      line += ' ';
      line += format_prob(record.word_probs[t]);
      line += ' ';
    }
    line += format_prob(record.gap_probs.back());
    out << line << '\n';
  }
  if (!out) throw IoError("write failed on " + path);
}

void write_score_file(const std::vector<double>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const double score : scores) out << format_prob(score) << '\n';
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace qe
