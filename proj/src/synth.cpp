#include "qesynth/synth.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>
#include <utility>

#include "qesynth/align.hpp"
#include "qesynth/error.hpp"
#include "qesynth/infill.hpp"

namespace qe {

namespace {

std::string format_probability_error(const char* name, double value) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s must be a probability in [0, 1], got %g", name, value);
  return buf;
}

// Runs work(i) for every index on up to `jobs` threads.  Work items are
// claimed dynamically, so callers must write results into per-index slots
// to keep output independent of scheduling.
void run_indexed(std::size_t count, unsigned jobs,
                 const std::function<void(std::size_t)>& work) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        work(i);
      }
    });
  }
  for (auto& t : threads) t.join();
}

QEExample make_record(Tokens source, Tokens hypothesis, Tokens reference,
                      ScoringMode scoring, Route route) {
  QEExample record;
  record.source = std::move(source);
  record.hypothesis = std::move(hypothesis);
  record.pseudo_post_edit = std::move(reference);
  const EditScript script =
      edit_distance_align(record.hypothesis, record.pseudo_post_edit);
  record.tags = tags_from_script(script, record.hypothesis.size());
  record.sentence_score = scoring == ScoringMode::Hter
                              ? hter(script, record.pseudo_post_edit.size())
                              : bad_fraction(record.tags);
  record.route = route;
  return record;
}

// Shared per-record error plumbing for both synthesis routes: either throw
// on the lowest failing index or collect skips, but never reorder output.
struct RecordSlot {
  std::optional<QEExample> record;
  std::string error;
};

QEDataset assemble(std::vector<RecordSlot>& slots,
                   std::vector<RejectedLine>* skipped) {
  QEDataset dataset;
  dataset.records.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& slot = slots[i];
    if (!slot.error.empty()) {
      if (!skipped) {
        throw Error("record " + std::to_string(i + 1) + ": " + slot.error);
      }
      skipped->push_back({i + 1, slot.error});
      continue;
    }
    dataset.records.push_back(std::move(*slot.record));
  }
  return dataset;
}

// Tokenizes one side of a record, naming the side in any failure so skip
// reports stay actionable.
Tokens tokenize_side(const std::string& text, TokenizerProfile profile,
                     const char* side) {
  try {
    return tokenize(text, profile);
  } catch (const Error& e) {
    throw Error(std::string(side) + ": " + e.what());
  }
}

nlohmann::ordered_json base_meta(Route route, const SynthOptions& options) {
  nlohmann::ordered_json meta;
  meta["route"] = route == Route::Nmt ? "nmt" : "mlm";
  meta["scoring"] = scoring_mode_name(options.scoring);
  meta["tokenizer"] = tokenizer_profile_name(options.profile);
  return meta;
}

}  // namespace

void validate(const CorruptionConfig& config) {
  const std::pair<const char*, double> probabilities[] = {
      {"p_sub", config.p_sub}, {"p_del", config.p_del}, {"p_ins", config.p_ins}};
  for (const auto& [name, value] : probabilities) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(format_probability_error(name, value));
    }
  }
  if (!(config.span_mean > 0.0) || !std::isfinite(config.span_mean)) {
    throw Error("span_mean must be positive and finite");
  }
}

std::size_t MaskedDraft::mask_count() const {
  std::size_t count = 0;
  for (const auto& element : elements) count += element.is_mask ? 1 : 0;
  return count;
}

std::size_t sample_span_length(RandomStream& rng, double span_mean) {
  return static_cast<std::size_t>(rng.poisson(span_mean)) + 1;
}

MaskedDraft corrupt(const Tokens& reference, const CorruptionConfig& config,
                    RandomStream& rng) {
  validate(config);
  const std::size_t n = reference.size();

  // Pass 1: mark token positions for substitution-masking, then deletion.
  // Marks are drawn for every position before any span length so that the
  // random stream layout does not depend on earlier outcomes in the pass.
  std::vector<char> mask_mark(n, 0);
  std::vector<char> delete_mark(n, 0);
  for (std::size_t i = 0; i < n; ++i) mask_mark[i] = rng.bernoulli(config.p_sub);
  for (std::size_t i = 0; i < n; ++i) {
    delete_mark[i] = rng.bernoulli(config.p_del);
  }

  // Deletion spans extend rightward from each surviving mark; positions
  // swallowed by an earlier span lose their own mark (and any mask mark).
  std::vector<char> deleted(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!delete_mark[i] || deleted[i]) continue;
    const std::size_t span = sample_span_length(rng, config.span_mean);
    for (std::size_t j = i; j < n && j < i + span; ++j) deleted[j] = 1;
  }

  // Pass 2: insertion marks live on the n + 1 gaps around the tokens.
  std::vector<char> insert_mark(n + 1, 0);
  for (std::size_t g = 0; g <= n; ++g) {
    insert_mark[g] = rng.bernoulli(config.p_ins);
  }
  std::vector<std::size_t> insert_len(n + 1, 0);
  for (std::size_t g = 0; g <= n; ++g) {
    if (insert_mark[g]) insert_len[g] = sample_span_length(rng, config.span_mean);
  }

  MaskedDraft draft;
  draft.original = reference;
  for (std::size_t i = 0; i < n; ++i) draft.deletion_count += deleted[i] ? 1 : 0;

  auto emit_inserts = [&](std::size_t gap) {
    for (std::size_t k = 0; k < insert_len[gap]; ++k) {
      draft.elements.push_back({true, kMaskToken, std::nullopt});
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    emit_inserts(i);
    if (deleted[i]) continue;
    if (mask_mark[i]) {
      draft.elements.push_back({true, kMaskToken, i});
    } else {
      draft.elements.push_back({false, reference[i], i});
    }
  }
  emit_inserts(n);

  // A fully deleted sentence with no insertions would leave nothing for the
  // infiller; force a single mask run so the draft stays non-degenerate.
  if (draft.elements.empty() && n > 0) {
    const std::size_t span = sample_span_length(rng, config.span_mean);
    for (std::size_t k = 0; k < span; ++k) {
      draft.elements.push_back({true, kMaskToken, std::nullopt});
    }
  }
  return draft;
}

QEDataset synth_from_hypotheses(const std::vector<BitextPair>& pairs,
                                const std::vector<std::string>& hypotheses,
                                const SynthOptions& options,
                                std::vector<RejectedLine>* skipped) {
  if (pairs.size() != hypotheses.size()) {
    throw Error("hypothesis count mismatch: " + std::to_string(pairs.size()) +
                " bitext pairs vs " + std::to_string(hypotheses.size()) +
                " hypotheses");
  }
  std::vector<RecordSlot> slots(pairs.size());
  run_indexed(pairs.size(), options.jobs, [&](std::size_t i) {
    try {
      Tokens hyp = tokenize_side(hypotheses[i], options.profile, "hypothesis");
      Tokens src = tokenize_side(pairs[i].source, options.profile, "source");
      Tokens ref = tokenize_side(pairs[i].target, options.profile, "reference");
      slots[i].record = make_record(std::move(src), std::move(hyp),
                                    std::move(ref), options.scoring, Route::Nmt);
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });
  QEDataset dataset = assemble(slots, skipped);
  dataset.provenance = "nmt";
  dataset.meta = base_meta(Route::Nmt, options);
  return dataset;
}

QEDataset synth_by_rewriting(const std::vector<BitextPair>& pairs,
                             const CorruptionConfig& config,
                             const Infiller& infiller,
                             const SynthOptions& options,
                             std::vector<RejectedLine>* skipped) {
  validate(config);
  std::vector<RecordSlot> slots(pairs.size());
  run_indexed(pairs.size(), options.jobs, [&](std::size_t i) {
    try {
      Tokens src = tokenize_side(pairs[i].source, options.profile, "source");
      Tokens ref = tokenize_side(pairs[i].target, options.profile, "reference");
      RandomStream rng = substream(config.seed, i);
      const MaskedDraft draft = corrupt(ref, config, rng);
      Tokens rewritten = infiller.fill(src, draft, rng);
      validate_infill_output(draft, rewritten);
      slots[i].record =
          make_record(std::move(src), std::move(rewritten), std::move(ref),
                      options.scoring, Route::Mlm);
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });
  QEDataset dataset = assemble(slots, skipped);
  dataset.provenance = "mlm";
  dataset.meta = base_meta(Route::Mlm, options);
  dataset.meta["seed"] = config.seed;
  dataset.meta["infiller"] = infiller.name();
  dataset.meta["corruption"] = {{"p_sub", config.p_sub},
                                {"p_del", config.p_del},
                                {"p_ins", config.p_ins},
                                {"span_mean", config.span_mean}};
  return dataset;
}

}  // namespace qe
