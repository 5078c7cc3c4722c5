#include "qesynth/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qesynth/error.hpp"
#include "qesynth/rng.hpp"
#include "utf8.hpp"

namespace qe {
namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

Tokens split_whitespace(const std::string& text) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool parse_finite_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc{} && result.ptr == last && std::isfinite(out);
}

std::string format_double_shortest(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

// Scripts whose codepoints each stand alone as a token.
bool is_cjk_codepoint(char32_t cp) {
  return (cp >= 0x1100 && cp <= 0x11FF) ||    // Hangul Jamo
         (cp >= 0x2E80 && cp <= 0x2FDF) ||    // CJK radicals
         (cp >= 0x3001 && cp <= 0x303F) ||    // CJK punctuation (0x3000 is space)
         (cp >= 0x3040 && cp <= 0x30FF) ||    // Hiragana, Katakana
         (cp >= 0x3130 && cp <= 0x318F) ||    // Hangul compatibility Jamo
         (cp >= 0x31F0 && cp <= 0x31FF) ||    // Katakana phonetic extensions
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // CJK extension A
         (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK unified ideographs
         (cp >= 0xAC00 && cp <= 0xD7AF) ||    // Hangul syllables
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // CJK compatibility ideographs
         (cp >= 0xFF00 && cp <= 0xFFEF) ||    // fullwidth forms
         (cp >= 0x20000 && cp <= 0x2A6DF);    // CJK extension B
}

bool is_space_codepoint(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\r' || cp == U'\n' || cp == 0x3000;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

Tokens tokenize_space_delimited(const std::string& text) {
  Tokens tokens;
  for (const std::string& chunk : split_whitespace(text)) {
    std::size_t end = chunk.size();
    while (end > 0 && is_terminal_punct(chunk[end - 1])) --end;
    if (end == 0) {
      // Entirely punctuation ("...", "?!"): keep as one token.
      tokens.push_back(chunk);
      continue;
    }
    tokens.push_back(chunk.substr(0, end));
    for (std::size_t i = end; i < chunk.size(); ++i) tokens.push_back(std::string(1, chunk[i]));
  }
  return tokens;
}

Tokens tokenize_cjk(const std::string& text) {
  Tokens tokens;
  std::string run;  // pending non-CJK run (Latin letters, digits, ...)
  auto flush = [&] {
    if (!run.empty()) {
      tokens.push_back(run);
      run.clear();
    }
  };
  std::size_t i = 0;
  char32_t cp;
  while (i < text.size()) {
    if (!utf8::decode_next(text, i, cp)) {
      throw ParseError("tokenize: invalid UTF-8 input");
    }
    if (is_space_codepoint(cp)) {
      flush();
    } else if (is_cjk_codepoint(cp)) {
      flush();
      std::string one;
      append_utf8(one, cp);
      tokens.push_back(one);
    } else {
      append_utf8(run, cp);
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const std::string& line : lines) out << line << '\n';
  if (!out) throw IoError("write failed on " + path);
}

void check_parallel(const std::string& path_a, std::size_t a,
                    const std::string& path_b, std::size_t b) {
  if (a != b) {
    throw ParseError(path_a + " has " + std::to_string(a) + " lines but " +
                     path_b + " has " + std::to_string(b));
  }
}

}  // namespace

BitextFormat bitext_format_from_name(std::string_view name) {
  if (name == "tsv") return BitextFormat::Tsv;
  throw Error("unknown bitext format: " + std::string(name));
}

std::vector<BitextPair> parse_bitext(std::istream& in, BitextFormat format,
                                     std::vector<RejectedLine>* rejects) {
  (void)format;  // single format today
  std::vector<BitextPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  auto reject = [&](const std::string& reason) {
    if (!rejects) throw ParseError(reason, lineno);
    rejects->push_back({lineno, reason});
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!utf8::validate(line)) {
      reject("invalid UTF-8");
      continue;
    }
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      reject("expected 2 or 3 tab-separated fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (split_whitespace(fields[0]).empty()) {
      reject("empty source");
      continue;
    }
    if (split_whitespace(fields[1]).empty()) {
      reject("empty target");
      continue;
    }
    BitextPair pair;
    pair.source = fields[0];
    pair.target = fields[1];
    if (fields.size() == 3) {
      double score;
      if (!parse_finite_double(fields[2], score)) {
        reject("non-numeric score field: \"" + fields[2] + "\"");
        continue;
      }
      pair.margin_score = score;
      pair.score_text = fields[2];
    }
    pairs.push_back(std::move(pair));
  }
  if (in.bad()) throw IoError("read failure on bitext stream");
  return pairs;
}

void write_bitext(std::ostream& out, const std::vector<BitextPair>& pairs) {
  for (const BitextPair& pair : pairs) {
    out << pair.source << '\t' << pair.target;
    if (pair.margin_score) {
      out << '\t'
          << (pair.score_text.empty() ? format_double_shortest(*pair.margin_score)
                                      : pair.score_text);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on bitext stream");
}

FilterResult filter_by_margin(const std::vector<BitextPair>& pairs, double threshold) {
  if (!std::isfinite(threshold)) throw Error("filter_by_margin: threshold must be finite");
  FilterResult result;
  for (const BitextPair& pair : pairs) {
    if (!pair.margin_score) {
      ++result.unscored;
    } else if (*pair.margin_score >= threshold) {
      result.kept.push_back(pair);
    } else {
      ++result.below_threshold;
    }
  }
  return result;
}

TokenizerProfile tokenizer_profile_from_name(std::string_view name) {
  if (name == "space-delimited") return TokenizerProfile::SpaceDelimited;
  if (name == "cjk") return TokenizerProfile::Cjk;
  if (name == "pretokenized") return TokenizerProfile::Pretokenized;
  throw Error("unknown tokenizer profile: " + std::string(name));
}

const char* tokenizer_profile_name(TokenizerProfile profile) {
  switch (profile) {
    case TokenizerProfile::SpaceDelimited: return "space-delimited";
    case TokenizerProfile::Cjk: return "cjk";
    case TokenizerProfile::Pretokenized: return "pretokenized";
  }
  return "?";
}

Tokens tokenize(const std::string& text, TokenizerProfile profile) {
  Tokens tokens;
  switch (profile) {
    case TokenizerProfile::SpaceDelimited:
      tokens = tokenize_space_delimited(text);
      break;
    case TokenizerProfile::Cjk:
      tokens = tokenize_cjk(text);
      break;
    case TokenizerProfile::Pretokenized:
      tokens = split_whitespace(text);
      break;
  }
  if (tokens.empty()) throw ParseError("tokenize: empty or whitespace-only input");
  return tokens;
}

Route route_from_name(std::string_view name) {
  if (name == "nmt") return Route::Nmt;
  if (name == "mlm") return Route::Mlm;
  throw Error("unknown route: " + std::string(name));
}

const char* route_name(Route route) {
  return route == Route::Nmt ? "nmt" : "mlm";
}

ScoringMode scoring_mode_from_name(std::string_view name) {
  if (name == "hter") return ScoringMode::Hter;
  if (name == "bad_fraction") return ScoringMode::BadFraction;
  throw Error("unknown scoring mode: " + std::string(name));
}

const char* scoring_mode_name(ScoringMode mode) {
  return mode == ScoringMode::Hter ? "hter" : "bad_fraction";
}

StatsReport corpus_stats(const QEDataset& dataset) {
  if (dataset.records.empty()) throw Error("corpus_stats: empty dataset");
  std::size_t words = 0, bad_words = 0, gaps = 0, bad_gaps = 0;
  for (const QEExample& record : dataset.records) {
    words += record.tags.word_tags.size();
    gaps += record.tags.gap_tags.size();
    bad_words += std::count(record.tags.word_tags.begin(), record.tags.word_tags.end(), Tag::BAD);
    bad_gaps += std::count(record.tags.gap_tags.begin(), record.tags.gap_tags.end(), Tag::BAD);
  }
  if (words == 0 || gaps == 0) throw Error("corpus_stats: dataset has no tags");
  StatsReport report;
  report.size = dataset.records.size();
  report.mt_bad_pct = 100.0 * static_cast<double>(bad_words) / static_cast<double>(words);
  report.gap_bad_pct = 100.0 * static_cast<double>(bad_gaps) / static_cast<double>(gaps);
  return report;
}

QEDataset subsample(const QEDataset& dataset, std::size_t n, std::uint64_t seed) {
  const std::size_t size = dataset.records.size();
  if (n == 0 || n > size) {
    throw Error("subsample: n must be in [1, " + std::to_string(size) + "], got " +
                std::to_string(n));
  }
  std::vector<std::size_t> indices(size);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n slots are a uniform ordered draw
  // without replacement; sorting restores the original relative order.
  RandomStream rng(mix64(seed));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
    std::swap(indices[i], indices[j]);
  }
  std::sort(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n));

  QEDataset out;
  out.provenance = dataset.provenance;
  out.meta = dataset.meta;
  out.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.records.push_back(dataset.records[indices[i]]);
  return out;
}

void write_dataset(const QEDataset& dataset, const std::string& prefix) {
  std::vector<std::string> src, mt, pe, tags, hter;
  bool all_pe = true, any_pe = false;
  for (const QEExample& record : dataset.records) {
    src.push_back(join_tokens(record.source));
    mt.push_back(join_tokens(record.hypothesis));
    if (record.pseudo_post_edit.empty()) {
      all_pe = false;
    } else {
      any_pe = true;
      pe.push_back(join_tokens(record.pseudo_post_edit));
    }
    if (record.tags.word_tags.size() != record.hypothesis.size() ||
        record.tags.gap_tags.size() != record.hypothesis.size() + 1) {
      throw Error("write_dataset: tag lengths inconsistent with hypothesis");
    }
    std::string tag_line;
    for (std::size_t t = 0; t < record.tags.word_tags.size(); ++t) {
      tag_line += record.tags.gap_tags[t] == Tag::BAD ? "BAD " : "OK ";
      tag_line += record.tags.word_tags[t] == Tag::BAD ? "BAD " : "OK ";
    }
    tag_line += record.tags.gap_tags.back() == Tag::BAD ? "BAD" : "OK";
    tags.push_back(std::move(tag_line));
    hter.push_back(format_score(record.sentence_score));
  }
  if (any_pe && !all_pe) {
    throw Error("write_dataset: some records carry a pseudo post-edit and some do not");
  }
  write_lines(prefix + ".src", src);
  write_lines(prefix + ".mt", mt);
  write_lines(prefix + ".tags", tags);
  write_lines(prefix + ".hter", hter);
  if (any_pe) write_lines(prefix + ".pe", pe);
  if (!dataset.meta.is_null()) {
    write_lines(prefix + ".meta.jsonl", {dataset.meta.dump()});
  }
}

QEDataset read_dataset(const std::string& prefix) {
  const auto src = read_lines(prefix + ".src");
  const auto mt = read_lines(prefix + ".mt");
  const auto tag_lines = read_lines(prefix + ".tags");
  const auto hter_lines = read_lines(prefix + ".hter");
  check_parallel(prefix + ".src", src.size(), prefix + ".mt", mt.size());
  check_parallel(prefix + ".src", src.size(), prefix + ".tags", tag_lines.size());
  check_parallel(prefix + ".src", src.size(), prefix + ".hter", hter_lines.size());

  std::vector<std::string> pe;
  const bool has_pe = std::filesystem::exists(prefix + ".pe");
  if (has_pe) {
    pe = read_lines(prefix + ".pe");
    check_parallel(prefix + ".src", src.size(), prefix + ".pe", pe.size());
  }

  QEDataset dataset;
  const std::string meta_path = prefix + ".meta.jsonl";
  std::optional<Route> route;
  if (std::filesystem::exists(meta_path)) {
    const auto meta_lines = read_lines(meta_path);
    if (!meta_lines.empty()) {
      dataset.meta = nlohmann::ordered_json::parse(meta_lines.front(), nullptr, false);
      if (dataset.meta.is_discarded()) {
        throw ParseError("invalid JSON in " + meta_path, 1);
      }
      if (dataset.meta.contains("route")) {
        route = route_from_name(dataset.meta["route"].get<std::string>());
      }
      if (dataset.meta.contains("provenance")) {
        dataset.provenance = dataset.meta["provenance"].get<std::string>();
      }
    }
  }

  dataset.records.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::size_t lineno = i + 1;
    QEExample record;
    record.source = split_whitespace(src[i]);
    if (record.source.empty()) throw ParseError("empty source line in " + prefix + ".src", lineno);
    record.hypothesis = split_whitespace(mt[i]);
    if (record.hypothesis.empty()) throw ParseError("empty hypothesis line in " + prefix + ".mt", lineno);
    if (has_pe) {
      record.pseudo_post_edit = split_whitespace(pe[i]);
      if (record.pseudo_post_edit.empty()) {
        throw ParseError("empty line in " + prefix + ".pe", lineno);
      }
    }

    const Tokens raw_tags = split_whitespace(tag_lines[i]);
    const std::size_t hyp_len = record.hypothesis.size();
    if (raw_tags.size() != 2 * hyp_len + 1) {
      throw ParseError("expected " + std::to_string(2 * hyp_len + 1) + " tags for a " +
                           std::to_string(hyp_len) + "-token hypothesis, got " +
                           std::to_string(raw_tags.size()) + " in " + prefix + ".tags",
                       lineno);
    }
    for (std::size_t t = 0; t < raw_tags.size(); ++t) {
      if (raw_tags[t] != "OK" && raw_tags[t] != "BAD") {
        throw ParseError("tag must be OK or BAD, got \"" + raw_tags[t] + "\" in " +
                             prefix + ".tags",
                         lineno);
      }
      const Tag tag = raw_tags[t] == "BAD" ? Tag::BAD : Tag::OK;
      if (t % 2 == 0) {
        record.tags.gap_tags.push_back(tag);
      } else {
        record.tags.word_tags.push_back(tag);
      }
    }

    double score;
    if (!parse_finite_double(hter_lines[i], score) || score < 0.0 || score > 1.0) {
      throw ParseError("sentence score must be a number in [0, 1], got \"" +
                           hter_lines[i] + "\" in " + prefix + ".hter",
                       lineno);
    }
    record.sentence_score = score;
    record.route = route;
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

}  // namespace qe
