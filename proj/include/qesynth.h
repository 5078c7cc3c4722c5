/* C interface for the qesynth core. All functions returning qes_status
 * leave a thread-local message retrievable via qes_last_error() on
 * failure; object handles are opaque and must be released with the
 * matching *_free(). Paths are UTF-8. */
#ifndef QESYNTH_H
#define QESYNTH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qes_status {
  QES_OK = 0,
  QES_ERR_INVALID = 1,  /* bad argument or configuration */
  QES_ERR_PARSE = 2,    /* malformed input data */
  QES_ERR_IO = 3,
  QES_ERR_NETWORK = 4,  /* remote infiller transport failure */
  QES_ERR_PROTOCOL = 5, /* remote infiller contract violation */
  QES_ERR_RUNTIME = 6
} qes_status;

const char* qes_version(void);

/* Message for the most recent failure on the calling thread; empty string
 * if none. The pointer stays valid until the next qesynth call on the
 * same thread. */
const char* qes_last_error(void);

typedef struct qes_bitext qes_bitext;
typedef struct qes_dataset qes_dataset;
typedef struct qes_infiller qes_infiller;

/* -------- parallel corpus -------- */

/* Reads TAB-separated source/target[/margin-score] records. With
 * skip_bad_records != 0 malformed lines are dropped and counted into
 * *rejected (may be NULL); otherwise the first bad line fails the call. */
qes_status qes_bitext_read(const char* path, int skip_bad_records,
                           qes_bitext** out, size_t* rejected);
size_t qes_bitext_size(const qes_bitext* bitext);
/* Keeps pairs with a margin score >= threshold. *unscored / *below (each
 * may be NULL) receive the exclusion counts. */
qes_status qes_bitext_filter(const qes_bitext* bitext, double threshold,
                             qes_bitext** out, size_t* unscored, size_t* below);
qes_status qes_bitext_write(const qes_bitext* bitext, const char* path);
void qes_bitext_free(qes_bitext* bitext);

/* -------- infillers -------- */

qes_status qes_infiller_identity(qes_infiller** out);
/* vocab: token<TAB>weight per line, weights positive. */
qes_status qes_infiller_unigram(const char* vocab_path, qes_infiller** out);
/* endpoint: full http:// URL of a fill-mask service. batch_size bounds
 * the number of in-flight requests. */
qes_status qes_infiller_remote(const char* endpoint, long timeout_ms,
                               unsigned max_retries, unsigned batch_size,
                               qes_infiller** out);
void qes_infiller_free(qes_infiller* infiller);

/* -------- synthesis -------- */

typedef struct qes_synth_options {
  const char* scoring;   /* "hter" | "bad_fraction"; NULL = hter */
  const char* tokenizer; /* "space-delimited" | "cjk" | "pretokenized"; NULL = pretokenized */
  unsigned jobs;         /* 0 or 1 = serial */
  int skip_bad_records;
} qes_synth_options;

/* Aligns externally translated hypotheses (one per line of hyp_path,
 * parallel to the bitext) against the targets. *skipped (may be NULL)
 * receives the number of dropped records when skipping is enabled. */
qes_status qes_synth_nmt(const qes_bitext* bitext, const char* hyp_path,
                         const qes_synth_options* options, qes_dataset** out,
                         size_t* skipped);

typedef struct qes_corruption {
  double p_sub;     /* per-token masking probability */
  double p_del;     /* per-token deletion-span start probability */
  double p_ins;     /* per-gap insertion-run probability */
  double span_mean; /* Poisson mean for span lengths (shifted by one) */
  uint64_t seed;
} qes_corruption;

/* Corrupts each target, lets the infiller rewrite it, and aligns the
 * rewrite against the original. Deterministic in (inputs, corruption,
 * infiller); independent of jobs. */
qes_status qes_synth_mlm(const qes_bitext* bitext, const qes_corruption* corruption,
                         const qes_infiller* infiller,
                         const qes_synth_options* options, qes_dataset** out,
                         size_t* skipped);

/* -------- datasets -------- */

qes_status qes_dataset_read(const char* prefix, qes_dataset** out);
qes_status qes_dataset_write(const qes_dataset* dataset, const char* prefix);
size_t qes_dataset_size(const qes_dataset* dataset);
/* Serialized sidecar metadata ("{}" when absent); owned by the handle. */
const char* qes_dataset_meta_json(qes_dataset* dataset);

typedef struct qes_stats {
  size_t records;
  double mt_bad_pct;  /* BAD word tags over all word positions, percent */
  double gap_bad_pct; /* BAD gap tags over all gap positions, percent */
} qes_stats;

qes_status qes_dataset_stats(const qes_dataset* dataset, qes_stats* out);
qes_status qes_dataset_subsample(const qes_dataset* dataset, size_t n,
                                 uint64_t seed, qes_dataset** out);
void qes_dataset_free(qes_dataset* dataset);

/* -------- evaluation -------- */

typedef struct qes_confusion {
  uint64_t tp, tn, fp, fn; /* BAD is the positive class */
} qes_confusion;

typedef struct qes_category_scores {
  qes_confusion counts;
  double mcc, f1_ok, f1_bad;
} qes_category_scores;

typedef struct qes_word_report {
  qes_category_scores combined; /* words and gaps pooled; headline */
  qes_category_scores word;
  qes_category_scores gap;
} qes_word_report;

/* Both files: one record per line, OK/BAD in 2T+1 gap/word alternation. */
qes_status qes_score_word_files(const char* pred_path, const char* gold_path,
                                qes_word_report* out);

typedef struct qes_sentence_report {
  int has_pearson; /* 0 when variance is degenerate */
  double pearson;
  double mae;
  double rmse;
  size_t count;
} qes_sentence_report;

/* Both files: one real per line. */
qes_status qes_score_sentence_files(const char* pred_path, const char* gold_path,
                                    qes_sentence_report* out);

/* -------- ensembling -------- */

/* Inputs: probability-of-BAD files in 2T+1 gap/word alternation. Writes
 * the combined probabilities to out_probs_path and, when out_tags_path is
 * non-NULL, the thresholded OK/BAD tags alongside. weight applies to
 * stream A. */
qes_status qes_ensemble_word_files(const char* a_path, const char* b_path,
                                   double weight, double threshold,
                                   const char* out_probs_path,
                                   const char* out_tags_path);
/* Inputs: one score per line. clamp != 0 restricts output to [0,1]. */
qes_status qes_ensemble_sentence_files(const char* a_path, const char* b_path,
                                       double weight, int clamp,
                                       const char* out_path);
/* Grid-search the combination weight on a dev set; gold is a tag file
 * (word level) or score file (sentence level). */
qes_status qes_fit_weight_word_files(const char* a_path, const char* b_path,
                                     const char* gold_path, double threshold,
                                     double* out_weight);
qes_status qes_fit_weight_sentence_files(const char* a_path, const char* b_path,
                                         const char* gold_path, double* out_weight);

#ifdef __cplusplus
}
#endif

#endif /* QESYNTH_H */
