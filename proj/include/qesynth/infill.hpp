#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "qesynth/synth.hpp"

namespace qe {

/// Sentinel emitted by the identity infiller for inserted masks.
inline constexpr const char* kSentinelToken = "<unk>";

/// Fills every mask of a draft with exactly one token.
///
/// Contract for all implementations: the output has one token per draft
/// element, contains no mask placeholder, and reproduces the concrete
/// draft tokens unchanged and in order.
class Infiller {
 public:
  virtual ~Infiller() = default;

  /// `rng` is the calling record's stream; implementations that draw
  /// randomness must take it from there so runs stay reproducible.
  virtual Tokens fill(const Tokens& source, const MaskedDraft& draft,
                      RandomStream& rng) const = 0;

  virtual const char* name() const = 0;
};

/// Throws ProtocolError if `output` violates the Infiller contract for
/// `draft` (wrong length, residual mask, altered concrete token, or a
/// token that is empty or contains whitespace).
void validate_infill_output(const MaskedDraft& draft, const Tokens& output);

/// Desk-scale stand-in for a masked language model: every mask becomes an
/// independent weighted draw from a fixed vocabulary.
class UnigramInfiller : public Infiller {
 public:
  /// Entries keep their given order; weights must be positive and finite.
  explicit UnigramInfiller(std::vector<std::pair<std::string, double>> entries);

  /// Loads a two-column `token<TAB>weight` TSV.
  static UnigramInfiller from_tsv(const std::string& path);

  Tokens fill(const Tokens& source, const MaskedDraft& draft,
              RandomStream& rng) const override;
  const char* name() const override { return "unigram"; }

 private:
  std::vector<std::string> tokens_;
  std::vector<double> cumulative_;
};

/// Restores substitution masks to their original tokens and fills inserted
/// masks with kSentinelToken. Restored substitutions align as Match, which
/// makes this the reference fixture for tag-accounting tests.
class IdentityInfiller : public Infiller {
 public:
  Tokens fill(const Tokens& source, const MaskedDraft& draft,
              RandomStream& rng) const override;
  const char* name() const override { return "identity"; }
};

struct RemoteInfillConfig {
  std::string endpoint;  // full URL, e.g. http://127.0.0.1:8630/fill
  std::chrono::milliseconds timeout{5000};
  unsigned max_retries = 2;
  unsigned batch_size = 8;  // in-flight request bound
};

/// Client for an external fill-mask service.
///
/// Wire format: POST {endpoint} with body
///   {"source": [...tokens...], "draft": [...tokens, masks as "<mask>"...]}
/// expecting HTTP 200 and {"tokens": [...same length, no "<mask>"...]}.
/// Any other status is retried with exponential backoff up to max_retries;
/// a 200 body violating the contract is a ProtocolError and is not
/// retried. Zero-mask drafts short-circuit without touching the network.
class RemoteInfiller : public Infiller {
 public:
  explicit RemoteInfiller(RemoteInfillConfig config);

  Tokens fill(const Tokens& source, const MaskedDraft& draft,
              RandomStream& rng) const override;
  const char* name() const override { return "remote"; }

 private:
  RemoteInfillConfig config_;
  std::string host_base_;  // scheme://host:port
  std::string path_;
  mutable std::counting_semaphore<> slots_;
};

}  // namespace qe
