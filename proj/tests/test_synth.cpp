#include "qesynth/synth.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <doctest.h>

#include "qesynth/align.hpp"
#include "qesynth/error.hpp"
#include "qesynth/infill.hpp"
#include "testutil.hpp"

using namespace qe;

namespace {

CorruptionConfig config_with(double p_sub, double p_del, double p_ins,
                             std::uint64_t seed = 7) {
  CorruptionConfig config;
  config.p_sub = p_sub;
  config.p_del = p_del;
  config.p_ins = p_ins;
  config.seed = seed;
  return config;
}

std::vector<BitextPair> simple_pairs(const std::vector<std::string>& targets) {
  std::vector<BitextPair> pairs;
  for (const auto& target : targets) {
    BitextPair pair;
    pair.source = "src";
    pair.target = target;
    pairs.push_back(pair);
  }
  return pairs;
}

}  // namespace

TEST_CASE("corruption config validation") {
  CHECK_NOTHROW(validate(CorruptionConfig{}));
  CHECK_THROWS_AS(validate(config_with(1.5, 0, 0)), Error);
  CHECK_THROWS_AS(validate(config_with(-0.1, 0, 0)), Error);
  CHECK_THROWS_AS(validate(config_with(std::numeric_limits<double>::quiet_NaN(), 0, 0)),
                  Error);
  CorruptionConfig bad_span;
  bad_span.span_mean = 0.0;
  CHECK_THROWS_AS(validate(bad_span), Error);
  bad_span.span_mean = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(bad_span), Error);
}

TEST_CASE("span length sampler is shifted by one and has Poisson shape") {
  RandomStream rng(41);
  const std::size_t draws = 1'000'000;
  double sum = 0.0;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t len = sample_span_length(rng);
    REQUIRE(len >= 1);
    sum += static_cast<double>(len);
    ones += len == 1 ? 1 : 0;
  }
  const double mean = sum / static_cast<double>(draws);
  const double p_one = static_cast<double>(ones) / static_cast<double>(draws);
  CHECK(mean == doctest::Approx(2.0).epsilon(0.005));
  CHECK(std::abs(p_one - std::exp(-1.0)) < 0.005);
}

TEST_CASE("zero probabilities leave the reference untouched") {
  const Tokens ref = {"the", "cat", "sat"};
  RandomStream rng(3);
  const MaskedDraft draft = corrupt(ref, config_with(0, 0, 0), rng);
  REQUIRE(draft.elements.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK_FALSE(draft.elements[i].is_mask);
    CHECK(draft.elements[i].text == ref[i]);
    CHECK(draft.elements[i].origin == i);
  }
  CHECK(draft.mask_count() == 0);
  CHECK(draft.deletion_count == 0);
  CHECK(draft.original == ref);
}

TEST_CASE("p_sub = 1 masks every surviving token and keeps origins") {
  const Tokens ref = {"a", "b", "c", "d"};
  RandomStream rng(11);
  const MaskedDraft draft = corrupt(ref, config_with(1, 0, 0), rng);
  REQUIRE(draft.elements.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(draft.elements[i].is_mask);
    CHECK(draft.elements[i].text == kMaskToken);
    CHECK(draft.elements[i].origin == i);
  }
}

TEST_CASE("total deletion forces a single mask run") {
  const Tokens ref = {"a", "b", "c"};
  RandomStream rng(5);
  const MaskedDraft draft = corrupt(ref, config_with(0, 1, 0), rng);
  CHECK(draft.deletion_count == ref.size());
  REQUIRE_FALSE(draft.elements.empty());
  for (const auto& element : draft.elements) {
    CHECK(element.is_mask);
    CHECK_FALSE(element.origin.has_value());
  }
}

TEST_CASE("p_ins = 1 inserts a mask run at every gap") {
  const Tokens ref = {"x", "y"};
  RandomStream rng(9);
  const MaskedDraft draft = corrupt(ref, config_with(0, 0, 1), rng);
  // Concrete tokens survive in order, and inserted masks carry no origin.
  Tokens concrete;
  std::size_t inserted = 0;
  for (const auto& element : draft.elements) {
    if (element.is_mask) {
      CHECK_FALSE(element.origin.has_value());
      ++inserted;
    } else {
      concrete.push_back(element.text);
    }
  }
  CHECK(concrete == ref);
  CHECK(inserted >= ref.size() + 1);  // one run per gap, runs never empty
}

TEST_CASE("empirical mask rate tracks p_sub") {
  const CorruptionConfig config = config_with(0.15, 0, 0, 1234);
  RandomStream sentence_rng(99);
  std::size_t tokens_seen = 0;
  std::size_t masked = 0;
  std::uint64_t record = 0;
  while (tokens_seen < 200'000) {
    const Tokens ref = testutil::random_tokens(sentence_rng, 5, 30);
    RandomStream rng = substream(config.seed, record++);
    const MaskedDraft draft = corrupt(ref, config, rng);
    tokens_seen += ref.size();
    masked += draft.mask_count();
  }
  const double rate = static_cast<double>(masked) / static_cast<double>(tokens_seen);
  CHECK(std::abs(rate - 0.15) < 0.005);
}

TEST_CASE("corruption structural invariants hold under mixed probabilities") {
  RandomStream sentence_rng(2024);
  const CorruptionConfig config = config_with(0.3, 0.2, 0.2, 77);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Tokens ref = testutil::random_tokens(sentence_rng, 1, 20);
    RandomStream rng = substream(config.seed, i);
    const MaskedDraft draft = corrupt(ref, config, rng);

    REQUIRE_FALSE(draft.elements.empty());
    std::size_t survivors = 0;
    std::optional<std::size_t> last_origin;
    for (const auto& element : draft.elements) {
      if (element.origin) {
        REQUIRE(*element.origin < ref.size());
        if (last_origin) CHECK(*element.origin > *last_origin);
        last_origin = element.origin;
        ++survivors;
        if (!element.is_mask) CHECK(element.text == ref[*element.origin]);
      } else {
        CHECK(element.is_mask);  // only inserted masks lack an origin
      }
    }
    CHECK(survivors + draft.deletion_count == ref.size());
  }
}

TEST_CASE("corruption is deterministic for a fixed seed") {
  const Tokens ref = {"one", "two", "three", "four", "five", "six"};
  const CorruptionConfig config = config_with(0.4, 0.3, 0.3, 31415);
  RandomStream a(111), b(111);
  const MaskedDraft first = corrupt(ref, config, a);
  const MaskedDraft second = corrupt(ref, config, b);
  CHECK(first.elements == second.elements);
  CHECK(first.deletion_count == second.deletion_count);
}

TEST_CASE("hypothesis route computes tags and scores from the alignment") {
  std::vector<BitextPair> pairs = simple_pairs({"the cat sat", "a b"});
  const std::vector<std::string> hyps = {"the dog sat", "a b"};
  SynthOptions options;
  const QEDataset dataset = synth_from_hypotheses(pairs, hyps, options);

  REQUIRE(dataset.records.size() == 2);
  const QEExample& first = dataset.records[0];
  CHECK(first.hypothesis == Tokens{"the", "dog", "sat"});
  CHECK(first.pseudo_post_edit == Tokens{"the", "cat", "sat"});
  CHECK(first.tags.word_tags == std::vector<Tag>{Tag::OK, Tag::BAD, Tag::OK});
  CHECK(first.tags.gap_tags == std::vector<Tag>(4, Tag::OK));
  CHECK(first.sentence_score == doctest::Approx(1.0 / 3.0));
  CHECK(first.route == Route::Nmt);

  const QEExample& second = dataset.records[1];
  CHECK(second.sentence_score == 0.0);
  CHECK(second.tags.word_tags == std::vector<Tag>(2, Tag::OK));

  CHECK(dataset.provenance == "nmt");
  CHECK(dataset.meta.at("route") == "nmt");
}

TEST_CASE("hypothesis route rejects mismatched input lengths") {
  std::vector<BitextPair> pairs = simple_pairs({"a", "b"});
  CHECK_THROWS_WITH_AS(synth_from_hypotheses(pairs, {"a"}, SynthOptions{}),
                       doctest::Contains("mismatch"), Error);
}

TEST_CASE("bad records abort with their index or are skipped on request") {
  std::vector<BitextPair> pairs = simple_pairs({"ok here", "fine too", "also fine"});
  const std::vector<std::string> hyps = {"ok here", "", "also fine"};

  CHECK_THROWS_WITH_AS(synth_from_hypotheses(pairs, hyps, SynthOptions{}),
                       doctest::Contains("record 2"), Error);

  std::vector<RejectedLine> skipped;
  const QEDataset dataset = synth_from_hypotheses(pairs, hyps, SynthOptions{}, &skipped);
  CHECK(dataset.records.size() == 2);
  REQUIRE(skipped.size() == 1);
  CHECK(skipped[0].line == 2);
  CHECK(skipped[0].reason.find("hypothesis") != std::string::npos);
}

TEST_CASE("identity infiller round-trips substitution-only corruption") {
  RandomStream sentence_rng(55);
  std::vector<std::string> targets;
  for (int i = 0; i < 60; ++i) {
    const Tokens tokens = testutil::random_tokens(sentence_rng, 1, 15);
    std::string line;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) line += ' ';
      line += tokens[t];
    }
    targets.push_back(line);
  }
  std::vector<BitextPair> pairs = simple_pairs(targets);
  CorruptionConfig config = config_with(0.25, 0, 0, 4242);
  const IdentityInfiller infiller;
  const QEDataset dataset = synth_by_rewriting(pairs, config, infiller, SynthOptions{});

  REQUIRE(dataset.records.size() == pairs.size());
  for (const QEExample& record : dataset.records) {
    CHECK(record.hypothesis == record.pseudo_post_edit);
    CHECK(record.sentence_score == 0.0);
    for (const Tag tag : record.tags.word_tags) CHECK(tag == Tag::OK);
    for (const Tag tag : record.tags.gap_tags) CHECK(tag == Tag::OK);
    CHECK(record.route == Route::Mlm);
  }
  CHECK(dataset.meta.at("seed") == 4242);
  CHECK(dataset.meta.at("infiller") == "identity");
  CHECK(dataset.meta.at("corruption").at("p_sub") == 0.25);
}

TEST_CASE("rewriting output is identical for any worker count") {
  RandomStream sentence_rng(77);
  std::vector<std::string> targets;
  for (int i = 0; i < 200; ++i) {
    const Tokens tokens = testutil::random_tokens(sentence_rng, 1, 25);
    std::string line;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) line += ' ';
      line += tokens[t];
    }
    targets.push_back(line);
  }
  std::vector<BitextPair> pairs = simple_pairs(targets);
  const CorruptionConfig config = config_with(0.2, 0.1, 0.1, 90210);
  const UnigramInfiller infiller({{"alpha", 2.0}, {"beta", 1.0}, {"gamma", 1.0}});

  SynthOptions serial;
  serial.jobs = 1;
  SynthOptions parallel;
  parallel.jobs = 4;
  const QEDataset a = synth_by_rewriting(pairs, config, infiller, serial);
  const QEDataset b = synth_by_rewriting(pairs, config, infiller, parallel);

  testutil::TempDir dir("synth-jobs");
  write_dataset(a, dir.str("serial"));
  write_dataset(b, dir.str("parallel"));
  for (const char* ext : {".src", ".mt", ".tags", ".hter", ".pe", ".meta.jsonl"}) {
    CHECK(testutil::read_file(dir.str("serial") + ext) ==
          testutil::read_file(dir.str("parallel") + ext));
  }
}

TEST_CASE("rewriting skips or aborts on empty targets like the other route") {
  std::vector<BitextPair> pairs = simple_pairs({"good text", "   ", "more text"});
  const CorruptionConfig config = config_with(0.2, 0, 0, 1);
  const IdentityInfiller infiller;

  CHECK_THROWS_WITH_AS(synth_by_rewriting(pairs, config, infiller, SynthOptions{}),
                       doctest::Contains("record 2"), Error);

  std::vector<RejectedLine> skipped;
  const QEDataset dataset =
      synth_by_rewriting(pairs, config, infiller, SynthOptions{}, &skipped);
  CHECK(dataset.records.size() == 2);
  REQUIRE(skipped.size() == 1);
  CHECK(skipped[0].line == 2);
}

TEST_CASE("rewritten hypotheses differ from references once masks are filled") {
  // With a vocabulary disjoint from the reference alphabet, every mask
  // becomes a substitution error, so corrupted records must score > 0.
  std::vector<BitextPair> pairs = simple_pairs({"aa bb cc dd ee ff gg hh"});
  CorruptionConfig config = config_with(1.0, 0, 0, 8);
  const UnigramInfiller infiller({{"zz", 1.0}});
  const QEDataset dataset = synth_by_rewriting(pairs, config, infiller, SynthOptions{});
  REQUIRE(dataset.records.size() == 1);
  const QEExample& record = dataset.records[0];
  CHECK(record.sentence_score == 1.0);
  for (const Tag tag : record.tags.word_tags) CHECK(tag == Tag::BAD);
}
