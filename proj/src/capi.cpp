#include "qesynth.h"

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "qesynth/corpus.hpp"
#include "qesynth/ensemble.hpp"
#include "qesynth/error.hpp"
#include "qesynth/infill.hpp"
#include "qesynth/metrics.hpp"
#include "qesynth/synth.hpp"

struct qes_bitext {
  std::vector<qe::BitextPair> pairs;
};

struct qes_dataset {
  qe::QEDataset data;
  std::string meta_cache;
};

struct qes_infiller {
  std::unique_ptr<qe::Infiller> impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

qes_status fail(qes_status status, const std::string& message) {
  set_error(message);
  return status;
}

// Maps the C++ exception hierarchy onto status codes; every API entry
// point funnels through here.
qes_status translate(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const qe::ParseError*>(&e)) return QES_ERR_PARSE;
  if (dynamic_cast<const qe::IoError*>(&e)) return QES_ERR_IO;
  if (dynamic_cast<const qe::ProtocolError*>(&e)) return QES_ERR_PROTOCOL;
  if (dynamic_cast<const qe::NetworkError*>(&e)) return QES_ERR_NETWORK;
  if (dynamic_cast<const qe::Error*>(&e)) return QES_ERR_INVALID;
  return QES_ERR_RUNTIME;
}

template <typename Fn>
qes_status guarded(Fn&& fn) {
  try {
    set_error("");
    return fn();
  } catch (const std::exception& e) {
    return translate(e);
  } catch (...) {
    return fail(QES_ERR_RUNTIME, "unknown error");
  }
}

qes_status parse_options(const qes_synth_options* options, qe::SynthOptions& parsed,
                         bool& skip) {
  parsed = qe::SynthOptions{};
  skip = false;
  if (!options) return QES_OK;
  if (options->scoring) {
    parsed.scoring = qe::scoring_mode_from_name(options->scoring);
  }
  if (options->tokenizer) {
    parsed.profile = qe::tokenizer_profile_from_name(options->tokenizer);
  }
  parsed.jobs = options->jobs == 0 ? 1 : options->jobs;
  skip = options->skip_bad_records != 0;
  return QES_OK;
}

qes_category_scores convert(const qe::CategoryScores& scores) {
  qes_category_scores out;
  out.counts = {scores.counts.tp, scores.counts.tn, scores.counts.fp,
                scores.counts.fn};
  out.mcc = scores.mcc;
  out.f1_ok = scores.f1_ok;
  out.f1_bad = scores.f1_bad;
  return out;
}

}  // namespace

extern "C" {

const char* qes_version(void) { return "0.1.0"; }

const char* qes_last_error(void) { return g_last_error.c_str(); }

qes_status qes_bitext_read(const char* path, int skip_bad_records, qes_bitext** out,
                           size_t* rejected) {
  if (!path || !out) return fail(QES_ERR_INVALID, "path and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qe::IoError(std::string("cannot open ") + path);
    std::vector<qe::RejectedLine> rejects;
    auto handle = std::make_unique<qes_bitext>();
    handle->pairs = qe::parse_bitext(in, qe::BitextFormat::Tsv,
                                     skip_bad_records ? &rejects : nullptr);
    if (rejected) *rejected = rejects.size();
    *out = handle.release();
    return QES_OK;
  });
}

size_t qes_bitext_size(const qes_bitext* bitext) {
  return bitext ? bitext->pairs.size() : 0;
}

qes_status qes_bitext_filter(const qes_bitext* bitext, double threshold,
                             qes_bitext** out, size_t* unscored, size_t* below) {
  if (!bitext || !out) return fail(QES_ERR_INVALID, "bitext and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    qe::FilterResult result = qe::filter_by_margin(bitext->pairs, threshold);
    auto handle = std::make_unique<qes_bitext>();
    handle->pairs = std::move(result.kept);
    if (unscored) *unscored = result.unscored;
    if (below) *below = result.below_threshold;
    *out = handle.release();
    return QES_OK;
  });
}

qes_status qes_bitext_write(const qes_bitext* bitext, const char* path) {
  if (!bitext || !path) return fail(QES_ERR_INVALID, "bitext and path must be non-null");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qe::IoError(std::string("cannot open ") + path + " for writing");
    qe::write_bitext(out, bitext->pairs);
    if (!out) throw qe::IoError(std::string("write failed on ") + path);
    return QES_OK;
  });
}

void qes_bitext_free(qes_bitext* bitext) { delete bitext; }

qes_status qes_infiller_identity(qes_infiller** out) {
  if (!out) return fail(QES_ERR_INVALID, "out must be non-null");
  *out = new qes_infiller{std::make_unique<qe::IdentityInfiller>()};
  set_error("");
  return QES_OK;
}

qes_status qes_infiller_unigram(const char* vocab_path, qes_infiller** out) {
  if (!vocab_path || !out) {
    return fail(QES_ERR_INVALID, "vocab_path and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    auto infiller =
        std::make_unique<qe::UnigramInfiller>(qe::UnigramInfiller::from_tsv(vocab_path));
    *out = new qes_infiller{std::move(infiller)};
    return QES_OK;
  });
}

qes_status qes_infiller_remote(const char* endpoint, long timeout_ms,
                               unsigned max_retries, unsigned batch_size,
                               qes_infiller** out) {
  if (!endpoint || !out) {
    return fail(QES_ERR_INVALID, "endpoint and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    qe::RemoteInfillConfig config;
    config.endpoint = endpoint;
    if (timeout_ms > 0) config.timeout = std::chrono::milliseconds(timeout_ms);
    config.max_retries = max_retries;
    config.batch_size = batch_size == 0 ? 1 : batch_size;
    *out = new qes_infiller{std::make_unique<qe::RemoteInfiller>(config)};
    return QES_OK;
  });
}

void qes_infiller_free(qes_infiller* infiller) { delete infiller; }

qes_status qes_synth_nmt(const qes_bitext* bitext, const char* hyp_path,
                         const qes_synth_options* options, qes_dataset** out,
                         size_t* skipped) {
  if (!bitext || !hyp_path || !out) {
    return fail(QES_ERR_INVALID, "bitext, hyp_path and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    qe::SynthOptions parsed;
    bool skip = false;
    parse_options(options, parsed, skip);

    std::ifstream in(hyp_path, std::ios::binary);
    if (!in) throw qe::IoError(std::string("cannot open ") + hyp_path);
    std::vector<std::string> hypotheses;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      hypotheses.push_back(line);
    }
    if (in.bad()) throw qe::IoError(std::string("read failure on ") + hyp_path);

    std::vector<qe::RejectedLine> rejects;
    auto handle = std::make_unique<qes_dataset>();
    handle->data = qe::synth_from_hypotheses(bitext->pairs, hypotheses, parsed,
                                             skip ? &rejects : nullptr);
    if (skipped) *skipped = rejects.size();
    *out = handle.release();
    return QES_OK;
  });
}

qes_status qes_synth_mlm(const qes_bitext* bitext, const qes_corruption* corruption,
                         const qes_infiller* infiller,
                         const qes_synth_options* options, qes_dataset** out,
                         size_t* skipped) {
  if (!bitext || !corruption || !infiller || !infiller->impl || !out) {
    return fail(QES_ERR_INVALID,
                "bitext, corruption, infiller and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    qe::SynthOptions parsed;
    bool skip = false;
    parse_options(options, parsed, skip);

    qe::CorruptionConfig config;
    config.p_sub = corruption->p_sub;
    config.p_del = corruption->p_del;
    config.p_ins = corruption->p_ins;
    config.span_mean = corruption->span_mean;
    config.seed = corruption->seed;

    std::vector<qe::RejectedLine> rejects;
    auto handle = std::make_unique<qes_dataset>();
    handle->data = qe::synth_by_rewriting(bitext->pairs, config, *infiller->impl,
                                          parsed, skip ? &rejects : nullptr);
    if (skipped) *skipped = rejects.size();
    *out = handle.release();
    return QES_OK;
  });
}

qes_status qes_dataset_read(const char* prefix, qes_dataset** out) {
  if (!prefix || !out) return fail(QES_ERR_INVALID, "prefix and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<qes_dataset>();
    handle->data = qe::read_dataset(prefix);
    *out = handle.release();
    return QES_OK;
  });
}

qes_status qes_dataset_write(const qes_dataset* dataset, const char* prefix) {
  if (!dataset || !prefix) {
    return fail(QES_ERR_INVALID, "dataset and prefix must be non-null");
  }
  return guarded([&] {
    qe::write_dataset(dataset->data, prefix);
    return QES_OK;
  });
}

size_t qes_dataset_size(const qes_dataset* dataset) {
  return dataset ? dataset->data.records.size() : 0;
}

const char* qes_dataset_meta_json(qes_dataset* dataset) {
  if (!dataset) return "{}";
  dataset->meta_cache =
      dataset->data.meta.is_null() ? "{}" : dataset->data.meta.dump();
  return dataset->meta_cache.c_str();
}

qes_status qes_dataset_stats(const qes_dataset* dataset, qes_stats* out) {
  if (!dataset || !out) return fail(QES_ERR_INVALID, "dataset and out must be non-null");
  return guarded([&] {
    const qe::StatsReport report = qe::corpus_stats(dataset->data);
    out->records = report.size;
    out->mt_bad_pct = report.mt_bad_pct;
    out->gap_bad_pct = report.gap_bad_pct;
    return QES_OK;
  });
}

qes_status qes_dataset_subsample(const qes_dataset* dataset, size_t n, uint64_t seed,
                                 qes_dataset** out) {
  if (!dataset || !out) return fail(QES_ERR_INVALID, "dataset and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<qes_dataset>();
    handle->data = qe::subsample(dataset->data, n, seed);
    *out = handle.release();
    return QES_OK;
  });
}

void qes_dataset_free(qes_dataset* dataset) { delete dataset; }

qes_status qes_score_word_files(const char* pred_path, const char* gold_path,
                                qes_word_report* out) {
  if (!pred_path || !gold_path || !out) {
    return fail(QES_ERR_INVALID, "paths and out must be non-null");
  }
  return guarded([&] {
    const auto pred = qe::read_tag_file(pred_path);
    const auto gold = qe::read_tag_file(gold_path);
    const qe::WordLevelReport report = qe::evaluate_word_level(pred, gold);
    out->combined = convert(report.combined);
    out->word = convert(report.word);
    out->gap = convert(report.gap);
    return QES_OK;
  });
}

qes_status qes_score_sentence_files(const char* pred_path, const char* gold_path,
                                    qes_sentence_report* out) {
  if (!pred_path || !gold_path || !out) {
    return fail(QES_ERR_INVALID, "paths and out must be non-null");
  }
  return guarded([&] {
    const auto pred = qe::read_score_file(pred_path);
    const auto gold = qe::read_score_file(gold_path);
    const qe::SentenceLevelReport report = qe::evaluate_sentence_level(pred, gold);
    out->has_pearson = report.pearson.has_value() ? 1 : 0;
    out->pearson = report.pearson.value_or(0.0);
    out->mae = report.mae;
    out->rmse = report.rmse;
    out->count = report.count;
    return QES_OK;
  });
}

qes_status qes_ensemble_word_files(const char* a_path, const char* b_path,
                                   double weight, double threshold,
                                   const char* out_probs_path,
                                   const char* out_tags_path) {
  if (!a_path || !b_path || !out_probs_path) {
    return fail(QES_ERR_INVALID, "input and output paths must be non-null");
  }
  return guarded([&] {
    const auto a = qe::read_word_prob_file(a_path);
    const auto b = qe::read_word_prob_file(b_path);
    if (a.size() != b.size()) {
      throw qe::Error("stream A has " + std::to_string(a.size()) +
                      " records but stream B has " + std::to_string(b.size()));
    }
    const qe::EnsembleWeights weights{weight, threshold};
    std::vector<qe::WordProbSequence> combined;
    std::vector<qe::TagSequence> tags;
    combined.reserve(a.size());
    tags.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      try {
        auto [probs, record_tags] = qe::combine_word(a[i], b[i], weights);
        combined.push_back(std::move(probs));
        tags.push_back(std::move(record_tags));
      } catch (const qe::Error& e) {
        throw qe::Error("record " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    qe::write_word_prob_file(combined, out_probs_path);
    if (out_tags_path) {
      std::ofstream tags_out(out_tags_path, std::ios::binary);
      if (!tags_out) {
        throw qe::IoError(std::string("cannot open ") + out_tags_path +
                          " for writing");
      }
      for (const qe::TagSequence& record : tags) {
        std::string line;
        for (std::size_t t = 0; t < record.word_tags.size(); ++t) {
          line += record.gap_tags[t] == qe::Tag::BAD ? "BAD " : "OK ";
          line += record.word_tags[t] == qe::Tag::BAD ? "BAD " : "OK ";
        }
        line += record.gap_tags.back() == qe::Tag::BAD ? "BAD" : "OK";
        tags_out << line << '\n';
      }
      if (!tags_out) {
        throw qe::IoError(std::string("write failed on ") + out_tags_path);
      }
    }
    return QES_OK;
  });
}

qes_status qes_ensemble_sentence_files(const char* a_path, const char* b_path,
                                       double weight, int clamp,
                                       const char* out_path) {
  if (!a_path || !b_path || !out_path) {
    return fail(QES_ERR_INVALID, "input and output paths must be non-null");
  }
  return guarded([&] {
    const auto a = qe::read_score_file(a_path);
    const auto b = qe::read_score_file(b_path);
    if (a.size() != b.size()) {
      throw qe::Error("stream A has " + std::to_string(a.size()) +
                      " scores but stream B has " + std::to_string(b.size()));
    }
    const qe::EnsembleWeights weights{weight, 0.5};
    std::vector<double> combined;
    combined.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      combined.push_back(qe::combine_sentence(a[i], b[i], weights, clamp != 0));
    }
    qe::write_score_file(combined, out_path);
    return QES_OK;
  });
}

qes_status qes_fit_weight_word_files(const char* a_path, const char* b_path,
                                     const char* gold_path, double threshold,
                                     double* out_weight) {
  if (!a_path || !b_path || !gold_path || !out_weight) {
    return fail(QES_ERR_INVALID, "paths and out_weight must be non-null");
  }
  return guarded([&] {
    const auto a = qe::read_word_prob_file(a_path);
    const auto b = qe::read_word_prob_file(b_path);
    const auto gold = qe::read_tag_file(gold_path);
    *out_weight = qe::fit_weight_word(a, b, gold, threshold).w;
    return QES_OK;
  });
}

qes_status qes_fit_weight_sentence_files(const char* a_path, const char* b_path,
                                         const char* gold_path, double* out_weight) {
  if (!a_path || !b_path || !gold_path || !out_weight) {
    return fail(QES_ERR_INVALID, "paths and out_weight must be non-null");
  }
  return guarded([&] {
    const auto a = qe::read_score_file(a_path);
    const auto b = qe::read_score_file(b_path);
    const auto gold = qe::read_score_file(gold_path);
    *out_weight = qe::fit_weight_sentence(a, b, gold).w;
    return QES_OK;
  });
}

}  // extern "C"
