// qesynth: command-line front end over the C interface in qesynth.h.
// Everything here is argument plumbing and presentation; the pipeline
// lives in the shared library.

#include "qesynth.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using ordered_json = nlohmann::ordered_json;

struct BitextDeleter {
  void operator()(qes_bitext* b) const { qes_bitext_free(b); }
};
struct DatasetDeleter {
  void operator()(qes_dataset* d) const { qes_dataset_free(d); }
};
struct InfillerDeleter {
  void operator()(qes_infiller* i) const { qes_infiller_free(i); }
};
using BitextPtr = std::unique_ptr<qes_bitext, BitextDeleter>;
using DatasetPtr = std::unique_ptr<qes_dataset, DatasetDeleter>;
using InfillerPtr = std::unique_ptr<qes_infiller, InfillerDeleter>;

void check(qes_status status) {
  if (status != QES_OK) throw std::runtime_error(qes_last_error());
}

std::string format(const char* spec, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

// Flags shared by every subcommand.
struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string output_format = "text";  // text | json
  std::string manifest_path;
  bool skip_bad_records = false;
};

// Collected while a subcommand runs; serialized if --manifest was given.
struct RunManifest {
  std::string subcommand;
  ordered_json config = ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(const GlobalOptions& global, const RunManifest& manifest,
                    double duration_seconds) {
  if (global.manifest_path.empty()) return;
  ordered_json doc;
  doc["subcommand"] = manifest.subcommand;
  doc["config"] = manifest.config;
  doc["config"]["jobs"] = global.jobs;
  doc["config"]["format"] = global.output_format;
  doc["config"]["skip_bad_records"] = global.skip_bad_records;
  doc["seed"] = global.seed;
  doc["inputs"] = manifest.inputs;
  doc["outputs"] = manifest.outputs;
  doc["toolkit_version"] = qes_version();
  doc["duration_seconds"] = duration_seconds;
  std::FILE* out = std::fopen(global.manifest_path.c_str(), "wb");
  if (!out) {
    throw std::runtime_error("cannot write manifest: " + global.manifest_path);
  }
  const std::string text = doc.dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), out);
  std::fclose(out);
}

BitextPtr read_bitext(const std::string& path, const GlobalOptions& global) {
  qes_bitext* raw = nullptr;
  std::size_t rejected = 0;
  check(qes_bitext_read(path.c_str(), global.skip_bad_records ? 1 : 0, &raw,
                        &rejected));
  if (rejected > 0) {
    std::fprintf(stderr, "skipped %zu malformed line(s) in %s\n", rejected,
                 path.c_str());
  }
  return BitextPtr(raw);
}

InfillerPtr make_infiller(const std::string& spec, long timeout_ms,
                          unsigned max_retries, unsigned batch_size) {
  qes_infiller* raw = nullptr;
  if (spec == "identity") {
    check(qes_infiller_identity(&raw));
  } else if (spec.rfind("unigram:", 0) == 0) {
    check(qes_infiller_unigram(spec.substr(8).c_str(), &raw));
  } else if (spec == "remote" || spec.rfind("remote:", 0) == 0) {
    std::string endpoint = spec == "remote" ? "" : spec.substr(7);
    if (endpoint.empty()) {
      const char* env = std::getenv("QESYNTH_INFILL_ENDPOINT");
      if (env) endpoint = env;
    }
    if (endpoint.empty()) {
      throw std::runtime_error(
          "remote infiller needs remote:URL or QESYNTH_INFILL_ENDPOINT");
    }
    check(qes_infiller_remote(endpoint.c_str(), timeout_ms, max_retries,
                              batch_size, &raw));
  } else {
    throw std::runtime_error("unknown infiller '" + spec +
                             "' (expected identity, unigram:PATH, or remote[:URL])");
  }
  return InfillerPtr(raw);
}

void print_word_report(const qes_word_report& report, const std::string& fmt) {
  if (fmt == "json") {
    ordered_json doc;
    const auto emit = [&doc](const char* name, const qes_category_scores& c) {
      doc[name] = {{"counts",
                    {{"tp", c.counts.tp},
                     {"tn", c.counts.tn},
                     {"fp", c.counts.fp},
                     {"fn", c.counts.fn}}},
                   {"mcc", c.mcc},
                   {"f1_ok", c.f1_ok},
                   {"f1_bad", c.f1_bad}};
    };
    emit("combined", report.combined);
    emit("word", report.word);
    emit("gap", report.gap);
    std::printf("%s\n", doc.dump(2).c_str());
    return;
  }
  std::printf("MCC %.3f F1-OK %.3f F1-BAD %.3f\n", report.combined.mcc,
              report.combined.f1_ok, report.combined.f1_bad);
  std::printf("%-8s %6s %6s %6s\n", "category", "MCC", "F1-OK", "F1-BAD");
  const auto row = [](const char* name, const qes_category_scores& c) {
    std::printf("%-8s %6.3f %6.3f %6.3f\n", name, c.mcc, c.f1_ok, c.f1_bad);
  };
  row("combined", report.combined);
  row("word", report.word);
  row("gap", report.gap);
}

void print_sentence_report(const qes_sentence_report& report,
                           const std::string& fmt) {
  if (fmt == "json") {
    ordered_json doc;
    if (report.has_pearson) {
      doc["pearson"] = report.pearson;
    } else {
      doc["pearson"] = nullptr;
    }
    doc["mae"] = report.mae;
    doc["rmse"] = report.rmse;
    doc["count"] = report.count;
    std::printf("%s\n", doc.dump(2).c_str());
    return;
  }
  const std::string pearson =
      report.has_pearson ? format("%.3f", report.pearson) : "undefined";
  std::printf("Pearson %s MAE %.3f RMSE %.3f\n", pearson.c_str(), report.mae,
              report.rmse);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize and evaluate translation quality estimation data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master random seed");
  app.add_option("--jobs", global.jobs, "Record-parallel worker count")
      ->check(CLI::Range(1u, 256u));
  app.add_option("--format", global.output_format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--manifest", global.manifest_path,
                 "Write a run manifest (JSON) to this path");
  app.add_flag("--skip-bad-records", global.skip_bad_records,
               "Drop malformed records instead of failing");

  // filter
  std::string filter_in, filter_out;
  double filter_threshold = 1.06;
  CLI::App* filter = app.add_subcommand(
      "filter", "Keep bitext pairs at or above a margin-score threshold");
  filter->add_option("input", filter_in, "Bitext TSV")->required();
  filter->add_option("output", filter_out, "Filtered TSV")->required();
  filter->add_option("--threshold", filter_threshold, "Minimum margin score");

  // synth-nmt
  std::string nmt_bitext, nmt_hyps, nmt_out, nmt_scoring = "hter",
                                             nmt_tokenizer = "pretokenized";
  CLI::App* synth_nmt = app.add_subcommand(
      "synth-nmt", "Tag machine-translation hypotheses against references");
  synth_nmt->add_option("bitext", nmt_bitext, "Bitext TSV")->required();
  synth_nmt->add_option("hypotheses", nmt_hyps, "One hypothesis per line")
      ->required();
  synth_nmt->add_option("output", nmt_out, "Output dataset prefix")->required();
  synth_nmt->add_option("--scoring", nmt_scoring, "Sentence score")
      ->check(CLI::IsMember({"hter", "bad_fraction"}));
  synth_nmt->add_option("--tokenizer", nmt_tokenizer, "Tokenizer profile")
      ->check(CLI::IsMember({"space-delimited", "cjk", "pretokenized"}));

  // synth-mlm
  std::string mlm_bitext, mlm_out, mlm_infiller = "identity",
                                   mlm_scoring = "hter",
                                   mlm_tokenizer = "pretokenized";
  double p_sub = 0.15, p_del = 0.05, p_ins = 0.05, span_mean = 1.0;
  long timeout_ms = 5000;
  unsigned max_retries = 2, batch_size = 8;
  CLI::App* synth_mlm = app.add_subcommand(
      "synth-mlm", "Corrupt references, infill them, and tag the rewrites");
  synth_mlm->add_option("bitext", mlm_bitext, "Bitext TSV")->required();
  synth_mlm->add_option("output", mlm_out, "Output dataset prefix")->required();
  synth_mlm->add_option("--p-sub", p_sub, "Per-token masking probability");
  synth_mlm->add_option("--p-del", p_del, "Deletion-span start probability");
  synth_mlm->add_option("--p-ins", p_ins, "Insertion-run probability per gap");
  synth_mlm->add_option("--span-mean", span_mean,
                        "Poisson mean for span lengths (shifted by one)");
  synth_mlm->add_option("--infiller", mlm_infiller,
                        "identity | unigram:PATH | remote[:URL]");
  synth_mlm->add_option("--scoring", mlm_scoring, "Sentence score")
      ->check(CLI::IsMember({"hter", "bad_fraction"}));
  synth_mlm->add_option("--tokenizer", mlm_tokenizer, "Tokenizer profile")
      ->check(CLI::IsMember({"space-delimited", "cjk", "pretokenized"}));
  synth_mlm->add_option("--timeout-ms", timeout_ms, "Remote request timeout");
  synth_mlm->add_option("--max-retries", max_retries, "Remote retry budget");
  synth_mlm->add_option("--batch-size", batch_size,
                        "Remote in-flight request bound");

  // stats
  std::string stats_prefix;
  CLI::App* stats = app.add_subcommand("stats", "Report dataset tag statistics");
  stats->add_option("dataset", stats_prefix, "Dataset prefix")->required();

  // subsample
  std::string sub_prefix, sub_out;
  std::size_t sub_n = 0;
  CLI::App* subsample =
      app.add_subcommand("subsample", "Draw a seeded subset of a dataset");
  subsample->add_option("dataset", sub_prefix, "Dataset prefix")->required();
  subsample->add_option("n", sub_n, "Records to keep")->required();
  subsample->add_option("output", sub_out, "Output dataset prefix")->required();

  // score
  std::string score_pred, score_gold, score_level = "word";
  CLI::App* score =
      app.add_subcommand("score", "Evaluate predictions against gold labels");
  score->add_option("predictions", score_pred, "Predicted tags/scores")
      ->required();
  score->add_option("gold", score_gold, "Gold tags/scores")->required();
  score->add_option("--level", score_level, "word or sentence")
      ->check(CLI::IsMember({"word", "sentence"}));

  // ensemble
  std::string ens_a, ens_b, ens_out, ens_level = "word", ens_fit, ens_tags;
  double ens_weight = 0.5, ens_threshold = 0.5;
  bool ens_no_clamp = false;
  CLI::App* ensemble = app.add_subcommand(
      "ensemble", "Linearly combine two prediction streams");
  ensemble->add_option("stream_a", ens_a, "First prediction file")->required();
  ensemble->add_option("stream_b", ens_b, "Second prediction file")->required();
  ensemble->add_option("output", ens_out, "Combined prediction file")
      ->required();
  ensemble->add_option("--level", ens_level, "word or sentence")
      ->check(CLI::IsMember({"word", "sentence"}));
  ensemble->add_option("--weight", ens_weight, "Weight on stream A");
  ensemble->add_option("--threshold", ens_threshold,
                       "BAD decision threshold (word level)");
  ensemble->add_option("--fit", ens_fit,
                       "Fit the weight on this gold file instead");
  ensemble->add_option("--tags", ens_tags,
                       "Also write thresholded tags here (word level)");
  ensemble->add_flag("--no-clamp", ens_no_clamp,
                     "Keep extrapolated sentence scores unclamped");

  CLI11_PARSE(app, argc, argv);

  RunManifest manifest;
  const auto started = std::chrono::steady_clock::now();
  try {
    if (*filter) {
      manifest.subcommand = "filter";
      manifest.config["threshold"] = filter_threshold;
      manifest.inputs = {filter_in};
      manifest.outputs = {filter_out};
      BitextPtr bitext = read_bitext(filter_in, global);
      const std::size_t total = qes_bitext_size(bitext.get());
      qes_bitext* kept_raw = nullptr;
      std::size_t unscored = 0, below = 0;
      check(qes_bitext_filter(bitext.get(), filter_threshold, &kept_raw,
                              &unscored, &below));
      BitextPtr kept(kept_raw);
      check(qes_bitext_write(kept.get(), filter_out.c_str()));
      std::fprintf(stderr, "%zu of %zu retained (%zu unscored, %zu below threshold)\n",
                   qes_bitext_size(kept.get()), total, unscored, below);
    } else if (*synth_nmt) {
      manifest.subcommand = "synth-nmt";
      manifest.config["scoring"] = nmt_scoring;
      manifest.config["tokenizer"] = nmt_tokenizer;
      manifest.inputs = {nmt_bitext, nmt_hyps};
      manifest.outputs = {nmt_out};
      BitextPtr bitext = read_bitext(nmt_bitext, global);
      qes_synth_options options{nmt_scoring.c_str(), nmt_tokenizer.c_str(),
                                global.jobs, global.skip_bad_records ? 1 : 0};
      qes_dataset* raw = nullptr;
      std::size_t skipped = 0;
      check(qes_synth_nmt(bitext.get(), nmt_hyps.c_str(), &options, &raw,
                          &skipped));
      DatasetPtr dataset(raw);
      if (skipped > 0) {
        std::fprintf(stderr, "skipped %zu record(s)\n", skipped);
      }
      check(qes_dataset_write(dataset.get(), nmt_out.c_str()));
      std::fprintf(stderr, "wrote %zu record(s) to %s\n",
                   qes_dataset_size(dataset.get()), nmt_out.c_str());
    } else if (*synth_mlm) {
      manifest.subcommand = "synth-mlm";
      manifest.config["p_sub"] = p_sub;
      manifest.config["p_del"] = p_del;
      manifest.config["p_ins"] = p_ins;
      manifest.config["span_mean"] = span_mean;
      manifest.config["infiller"] = mlm_infiller;
      manifest.config["scoring"] = mlm_scoring;
      manifest.config["tokenizer"] = mlm_tokenizer;
      manifest.inputs = {mlm_bitext};
      manifest.outputs = {mlm_out};
      BitextPtr bitext = read_bitext(mlm_bitext, global);
      InfillerPtr infiller =
          make_infiller(mlm_infiller, timeout_ms, max_retries, batch_size);
      qes_corruption corruption{p_sub, p_del, p_ins, span_mean, global.seed};
      qes_synth_options options{mlm_scoring.c_str(), mlm_tokenizer.c_str(),
                                global.jobs, global.skip_bad_records ? 1 : 0};
      qes_dataset* raw = nullptr;
      std::size_t skipped = 0;
      check(qes_synth_mlm(bitext.get(), &corruption, infiller.get(), &options,
                          &raw, &skipped));
      DatasetPtr dataset(raw);
      if (skipped > 0) {
        std::fprintf(stderr, "skipped %zu record(s)\n", skipped);
      }
      check(qes_dataset_write(dataset.get(), mlm_out.c_str()));
      std::fprintf(stderr, "wrote %zu record(s) to %s\n",
                   qes_dataset_size(dataset.get()), mlm_out.c_str());
    } else if (*stats) {
      manifest.subcommand = "stats";
      manifest.inputs = {stats_prefix};
      qes_dataset* raw = nullptr;
      check(qes_dataset_read(stats_prefix.c_str(), &raw));
      DatasetPtr dataset(raw);
      qes_stats report;
      check(qes_dataset_stats(dataset.get(), &report));
      if (global.output_format == "json") {
        ordered_json doc;
        doc["records"] = report.records;
        doc["mt_bad_pct"] = report.mt_bad_pct;
        doc["gap_bad_pct"] = report.gap_bad_pct;
        std::printf("%s\n", doc.dump(2).c_str());
      } else {
        std::printf("records %zu\n", report.records);
        std::printf("mt_bad_pct %.6f\n", report.mt_bad_pct);
        std::printf("gap_bad_pct %.6f\n", report.gap_bad_pct);
      }
    } else if (*subsample) {
      manifest.subcommand = "subsample";
      manifest.config["n"] = sub_n;
      manifest.inputs = {sub_prefix};
      manifest.outputs = {sub_out};
      qes_dataset* raw = nullptr;
      check(qes_dataset_read(sub_prefix.c_str(), &raw));
      DatasetPtr dataset(raw);
      qes_dataset* sampled_raw = nullptr;
      check(qes_dataset_subsample(dataset.get(), sub_n, global.seed,
                                  &sampled_raw));
      DatasetPtr sampled(sampled_raw);
      check(qes_dataset_write(sampled.get(), sub_out.c_str()));
      std::fprintf(stderr, "wrote %zu record(s) to %s\n",
                   qes_dataset_size(sampled.get()), sub_out.c_str());
    } else if (*score) {
      manifest.subcommand = "score";
      manifest.config["level"] = score_level;
      manifest.inputs = {score_pred, score_gold};
      if (score_level == "word") {
        qes_word_report report;
        check(qes_score_word_files(score_pred.c_str(), score_gold.c_str(),
                                   &report));
        print_word_report(report, global.output_format);
      } else {
        qes_sentence_report report;
        check(qes_score_sentence_files(score_pred.c_str(), score_gold.c_str(),
                                       &report));
        print_sentence_report(report, global.output_format);
      }
    } else if (*ensemble) {
      manifest.subcommand = "ensemble";
      manifest.config["level"] = ens_level;
      manifest.inputs = {ens_a, ens_b};
      manifest.outputs = {ens_out};
      double weight = ens_weight;
      if (ens_level == "word") {
        if (!ens_fit.empty()) {
          manifest.inputs.push_back(ens_fit);
          check(qes_fit_weight_word_files(ens_a.c_str(), ens_b.c_str(),
                                          ens_fit.c_str(), ens_threshold,
                                          &weight));
          std::fprintf(stderr, "fitted weight %.6f\n", weight);
        }
        manifest.config["weight"] = weight;
        manifest.config["threshold"] = ens_threshold;
        if (!ens_tags.empty()) manifest.outputs.push_back(ens_tags);
        check(qes_ensemble_word_files(
            ens_a.c_str(), ens_b.c_str(), weight, ens_threshold,
            ens_out.c_str(), ens_tags.empty() ? nullptr : ens_tags.c_str()));
      } else {
        if (!ens_fit.empty()) {
          manifest.inputs.push_back(ens_fit);
          check(qes_fit_weight_sentence_files(ens_a.c_str(), ens_b.c_str(),
                                              ens_fit.c_str(), &weight));
          std::fprintf(stderr, "fitted weight %.6f\n", weight);
        }
        manifest.config["weight"] = weight;
        manifest.config["clamp"] = !ens_no_clamp;
        check(qes_ensemble_sentence_files(ens_a.c_str(), ens_b.c_str(), weight,
                                          ens_no_clamp ? 0 : 1,
                                          ens_out.c_str()));
      }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    write_manifest(global, manifest, elapsed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qesynth: %s: %s\n", manifest.subcommand.c_str(),
                 e.what());
    return 1;
  }
  return 0;
}
