#include "qesynth/align.hpp"

#include <algorithm>
#include <cstdint>

#include "qesynth/error.hpp"

namespace qe {
namespace {

// Distance table over suffixes: d[i][j] = edit distance between hyp[i..)
// and ref[j..). Filled back to front so the script can then be read off
// front to back.
std::vector<std::uint32_t> suffix_distances(const Tokens& hyp, const Tokens& ref) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  std::vector<std::uint32_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = static_cast<std::uint32_t>(n - i);
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = static_cast<std::uint32_t>(m - j);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      const std::uint32_t diag = at(i + 1, j + 1) + (hyp[i] == ref[j] ? 0u : 1u);
      const std::uint32_t del = at(i + 1, j) + 1u;
      const std::uint32_t ins = at(i, j + 1) + 1u;
      at(i, j) = std::min({diag, del, ins});
    }
  }
  return d;
}

}  // namespace

EditScript edit_distance_align(const Tokens& hyp, const Tokens& ref) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  if (n == 0 && m == 0) {
    throw Error("edit_distance_align: both sequences are empty");
  }

  const std::vector<std::uint32_t> d = suffix_distances(hyp, ref);
  auto at = [&](std::size_t i, std::size_t j) { return d[i * (m + 1) + j]; };

  EditScript script;
  script.ops.reserve(std::max(n, m));
  script.cost = at(0, 0);

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && hyp[i] == ref[j] && at(i, j) == at(i + 1, j + 1)) {
      script.ops.push_back({EditKind::Match, i, j});
      ++i, ++j;
    } else if (i < n && j < m && at(i, j) == at(i + 1, j + 1) + 1) {
      script.ops.push_back({EditKind::Substitute, i, j});
      ++i, ++j;
    } else if (i < n && at(i, j) == at(i + 1, j) + 1) {
      script.ops.push_back({EditKind::Delete, i, std::nullopt});
      ++i;
    } else {
      script.ops.push_back({EditKind::Insert, std::nullopt, j});
      ++j;
    }
  }
  return script;
}

TagSequence tags_from_script(const EditScript& script, std::size_t hyp_len) {
  TagSequence tags;
  tags.word_tags.assign(hyp_len, Tag::OK);
  tags.gap_tags.assign(hyp_len + 1, Tag::OK);

  // `pos` tracks how many hypothesis tokens have been consumed; an Insert
  // seen at that point lands in gap `pos`.
  std::size_t pos = 0;
  for (const EditOp& op : script.ops) {
    switch (op.kind) {
      case EditKind::Match:
      case EditKind::Substitute:
      case EditKind::Delete:
        if (!op.hyp_index || *op.hyp_index != pos || pos >= hyp_len) {
          throw Error("tags_from_script: script does not cover a hypothesis of length " +
                      std::to_string(hyp_len));
        }
        if (op.kind != EditKind::Match) tags.word_tags[pos] = Tag::BAD;
        ++pos;
        break;
      case EditKind::Insert:
        tags.gap_tags[pos] = Tag::BAD;
        break;
    }
  }
  if (pos != hyp_len) {
    throw Error("tags_from_script: script does not cover a hypothesis of length " +
                std::to_string(hyp_len));
  }
  return tags;
}

double hter(const EditScript& script, std::size_t ref_len, bool clamp) {
  if (ref_len == 0) throw Error("hter: reference length is zero");
  const double value = static_cast<double>(script.cost) / static_cast<double>(ref_len);
  return clamp ? std::min(value, 1.0) : value;
}

double bad_fraction(const TagSequence& tags) {
  if (tags.word_tags.empty()) throw Error("bad_fraction: empty word tags");
  const auto bad = std::count(tags.word_tags.begin(), tags.word_tags.end(), Tag::BAD);
  return static_cast<double>(bad) / static_cast<double>(tags.word_tags.size());
}

}  // namespace qe
