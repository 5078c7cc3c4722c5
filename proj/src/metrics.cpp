#include "qesynth/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qesynth/error.hpp"

namespace qe {

namespace {

// Neumaier-compensated accumulator; keeps the metric sums well below the
// 1e-12 agreement bound against exact evaluation.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void tally(Tag pred, Tag gold, ConfusionCounts& counts) {
  if (gold == Tag::BAD) {
    (pred == Tag::BAD ? counts.tp : counts.fn) += 1;
  } else {
    (pred == Tag::BAD ? counts.fp : counts.tn) += 1;
  }
}

// A category can legitimately be empty (word-only prediction files carry
// no gap tags); report zeros for it rather than erroring out.
CategoryScores finish(const ConfusionCounts& counts) {
  CategoryScores scores;
  scores.counts = counts;
  if (counts.total() == 0) return scores;
  scores.mcc = mcc(counts);
  scores.f1_ok = f1(counts, Tag::OK);
  scores.f1_bad = f1(counts, Tag::BAD);
  return scores;
}

std::string format3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

nlohmann::ordered_json category_json(const CategoryScores& scores) {
  return {{"mcc", scores.mcc},
          {"f1_ok", scores.f1_ok},
          {"f1_bad", scores.f1_bad},
          {"counts",
           {{"tp", scores.counts.tp},
            {"tn", scores.counts.tn},
            {"fp", scores.counts.fp},
            {"fn", scores.counts.fn}}}};
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  tn += other.tn;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

double mcc(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw Error("mcc: empty counts");
  const long double tp = counts.tp, tn = counts.tn, fp = counts.fp, fn = counts.fn;
  const long double denom2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom2 == 0.0L) return 0.0;
  return static_cast<double>((tp * tn - fp * fn) / std::sqrt(denom2));
}

double f1(const ConfusionCounts& counts, Tag positive) {
  if (counts.total() == 0) throw Error("f1: empty counts");
  // With OK as positive the roles of the four cells swap.
  const std::uint64_t tp = positive == Tag::BAD ? counts.tp : counts.tn;
  const std::uint64_t fp = positive == Tag::BAD ? counts.fp : counts.fn;
  const std::uint64_t fn = positive == Tag::BAD ? counts.fn : counts.fp;
  const std::uint64_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

WordLevelReport evaluate_word_level(const std::vector<TagSequence>& pred,
                                    const std::vector<TagSequence>& gold) {
  if (pred.size() != gold.size()) {
    throw Error("prediction has " + std::to_string(pred.size()) +
                " records but gold has " + std::to_string(gold.size()));
  }
  if (pred.empty()) throw Error("no records to score");

  ConfusionCounts word_counts, gap_counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const TagSequence& p = pred[i];
    const TagSequence& g = gold[i];
    if (p.word_tags.size() != g.word_tags.size() ||
        p.gap_tags.size() != g.gap_tags.size()) {
      throw Error("record " + std::to_string(i + 1) + ": shape mismatch (pred " +
                  std::to_string(p.word_tags.size()) + "w/" +
                  std::to_string(p.gap_tags.size()) + "g, gold " +
                  std::to_string(g.word_tags.size()) + "w/" +
                  std::to_string(g.gap_tags.size()) + "g)");
    }
    for (std::size_t t = 0; t < p.word_tags.size(); ++t) {
      tally(p.word_tags[t], g.word_tags[t], word_counts);
    }
    for (std::size_t t = 0; t < p.gap_tags.size(); ++t) {
      tally(p.gap_tags[t], g.gap_tags[t], gap_counts);
    }
  }

  ConfusionCounts combined = word_counts;
  combined += gap_counts;

  WordLevelReport report;
  report.combined = finish(combined);
  report.word = finish(word_counts);
  report.gap = finish(gap_counts);
  return report;
}

SentenceLevelReport evaluate_sentence_level(const std::vector<double>& pred,
                                            const std::vector<double>& gold) {
  if (pred.size() != gold.size()) {
    throw Error("prediction has " + std::to_string(pred.size()) +
                " scores but gold has " + std::to_string(gold.size()));
  }
  if (pred.size() < 2) throw Error("need at least two scores");
  const std::size_t n = pred.size();
  const double dn = static_cast<double>(n);

  CompensatedSum abs_err, sq_err, sum_p, sum_g;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = pred[i] - gold[i];
    abs_err.add(std::abs(diff));
    sq_err.add(diff * diff);
    sum_p.add(pred[i]);
    sum_g.add(gold[i]);
  }

  SentenceLevelReport report;
  report.count = n;
  report.mae = abs_err.value() / dn;
  report.rmse = std::sqrt(sq_err.value() / dn);

  const double mean_p = sum_p.value() / dn;
  const double mean_g = sum_g.value() / dn;
  CompensatedSum cov, var_p, var_g;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mean_p;
    const double dg = gold[i] - mean_g;
    cov.add(dp * dg);
    var_p.add(dp * dp);
    var_g.add(dg * dg);
  }
  const double denom2 = var_p.value() * var_g.value();
  if (denom2 > 0.0) {
    report.pearson = cov.value() / std::sqrt(denom2);
  }
  return report;
}

std::vector<TagSequence> read_tag_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TagSequence> sequences;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TagSequence tags;
    std::istringstream fields(line);
    std::string field;
    std::vector<Tag> flat;
    while (fields >> field) {
      if (field == "OK") {
        flat.push_back(Tag::OK);
      } else if (field == "BAD") {
        flat.push_back(Tag::BAD);
      } else {
        throw ParseError("tag must be OK or BAD, got \"" + field + "\" in " + path,
                         lineno);
      }
    }
    if (flat.empty() || flat.size() % 2 == 0) {
      throw ParseError("expected an odd number of alternating gap/word tags in " +
                           path + ", got " + std::to_string(flat.size()),
                       lineno);
    }
    for (std::size_t t = 0; t < flat.size(); ++t) {
      (t % 2 == 0 ? tags.gap_tags : tags.word_tags).push_back(flat[t]);
    }
    sequences.push_back(std::move(tags));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return sequences;
}

std::vector<double> read_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double value = 0.0;
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw ParseError("expected one finite real, got \"" + line + "\" in " + path,
                       lineno);
    }
    scores.push_back(value);
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return scores;
}

std::string render_text(const WordLevelReport& report) {
  std::string out = "MCC " + format3(report.combined.mcc) + " F1-OK " +
                    format3(report.combined.f1_ok) + " F1-BAD " +
                    format3(report.combined.f1_bad) + "\n";
  out += "category  MCC     F1-OK   F1-BAD\n";
  const auto row = [&](const char* name, const CategoryScores& scores) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-8s  %6.3f  %6.3f  %6.3f\n", name, scores.mcc,
                  scores.f1_ok, scores.f1_bad);
    out += buf;
  };
  row("combined", report.combined);
  row("word", report.word);
  row("gap", report.gap);
  return out;
}

std::string render_text(const SentenceLevelReport& report) {
  std::string out = "Pearson ";
  out += report.pearson ? format3(*report.pearson) : "undefined";
  out += " MAE " + format3(report.mae) + " RMSE " + format3(report.rmse) + "\n";
  return out;
}

nlohmann::ordered_json to_json(const WordLevelReport& report) {
  nlohmann::ordered_json json;
  json["level"] = "word";
  json["combined"] = category_json(report.combined);
  json["word"] = category_json(report.word);
  json["gap"] = category_json(report.gap);
  return json;
}

nlohmann::ordered_json to_json(const SentenceLevelReport& report) {
  nlohmann::ordered_json json;
  json["level"] = "sentence";
  if (report.pearson) {
    json["pearson"] = *report.pearson;
  } else {
    json["pearson"] = nullptr;
  }
  json["mae"] = report.mae;
  json["rmse"] = report.rmse;
  json["count"] = report.count;
  return json;
}

}  // namespace qe
