#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qe {

using Tokens = std::vector<std::string>;

enum class EditKind : std::uint8_t { Match, Substitute, Delete, Insert };

/// One step of an edit script. Match/Substitute consume a token on both
/// sides, Delete consumes only a hypothesis token, Insert only a reference
/// token.
struct EditOp {
  EditKind kind;
  std::optional<std::size_t> hyp_index;  // absent for Insert
  std::optional<std::size_t> ref_index;  // absent for Delete

  bool operator==(const EditOp&) const = default;
};

/// Minimum-cost transformation of a hypothesis into its reference under
/// unit costs. Hypothesis and reference positions are each consumed exactly
/// once, in increasing order.
struct EditScript {
  std::vector<EditOp> ops;
  std::size_t cost = 0;  // number of non-Match ops

  bool operator==(const EditScript&) const = default;
};

enum class Tag : std::uint8_t { OK, BAD };

/// Per-token and per-gap labels for a hypothesis of length T: word_tags has
/// T entries, gap_tags has T+1 (gap 0 precedes the first token, gap T
/// follows the last).
struct TagSequence {
  std::vector<Tag> word_tags;
  std::vector<Tag> gap_tags;

  bool operator==(const TagSequence&) const = default;
};

/// Aligns `hyp` to `ref` with minimum unit-cost edit distance. Tokens match
/// only on exact string equality.
///
/// The minimizing script is usually not unique; this routine is
/// deterministic. It walks the pair front to back taking the first
/// applicable move in the order Match, Substitute, Delete, Insert, which
/// pushes tied non-match edits toward later hypothesis positions.
///
/// One empty side yields a degenerate all-Insert or all-Delete script; both
/// sides empty is an error.
EditScript edit_distance_align(const Tokens& hyp, const Tokens& ref);

/// Derives OK/BAD labels from a script: a word is BAD when its token is
/// substituted or deleted, a gap is BAD when at least one insertion falls in
/// it. Throws if the script does not cover a hypothesis of length hyp_len.
TagSequence tags_from_script(const EditScript& script, std::size_t hyp_len);

/// Edit operations per reference token. Clamped to [0, 1] by default,
/// matching the conventional range of post-editing effort scores.
double hter(const EditScript& script, std::size_t ref_len, bool clamp = true);

/// Fraction of BAD word tags; gap tags are not counted.
double bad_fraction(const TagSequence& tags);

}  // namespace qe
