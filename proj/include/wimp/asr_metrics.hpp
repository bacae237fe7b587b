#pragma once

// Word error rate and its importance-weighted variant.
//
// Weighted WER charges each substituted or deleted reference word its
// importance score. Insertions have no reference word, so each is charged the
// mean reference importance w, and the denominator grows by the same amount:
//
//   wwer = (sum of importance over S/D words + I*w) / (sum of all importance + I*w)
//
// This keeps the rate in [0, 1] and reduces to (S+D+I)/(N+I) under uniform
// importance, i.e. to plain WER when there are no insertions.

#include "wimp/corpus.hpp"
#include "wimp/error.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wimp {

enum class EditKind : std::uint8_t { match, substitute, del, insert };

struct AlignmentOp {
    EditKind kind = EditKind::match;
    std::optional<std::size_t> ref_index;
    std::optional<std::size_t> hyp_index;

    friend bool operator==(const AlignmentOp&, const AlignmentOp&) = default;
};

using Alignment = std::vector<AlignmentOp>;

struct ScoredReference {
    std::vector<Token> tokens;
    std::vector<double> importance;
};

// Whitespace split and ASCII lowercase.
inline std::vector<std::string> scoring_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto f : detail::split_ws(text)) out.push_back(detail::lower_ascii(f));
    return out;
}

// Minimum unit-cost edit alignment. The backtrace, walking from the end,
// prefers match, then substitute, then delete, then insert.
inline Alignment align(std::span<const std::string> ref, std::span<const std::string> hyp) {
    if (ref.empty()) throw DomainError("align: empty reference (WER undefined)");
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::size_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
        }

    Alignment ops;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i, j) == at(i - 1, j - 1)) {
            ops.push_back({EditKind::match, i - 1, j - 1});
            --i, --j;
        } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && at(i, j) == at(i - 1, j - 1) + 1) {
            ops.push_back({EditKind::substitute, i - 1, j - 1});
            --i, --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ops.push_back({EditKind::del, i - 1, std::nullopt});
            --i;
        } else {
            ops.push_back({EditKind::insert, std::nullopt, j - 1});
            --j;
        }
    }
    return {ops.rbegin(), ops.rend()};
}

struct EditCounts {
    std::size_t matches = 0;
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;

    std::size_t errors() const { return substitutions + deletions + insertions; }
    std::size_t reference_length() const { return matches + substitutions + deletions; }
};

inline EditCounts count_edits(const Alignment& alignment) {
    EditCounts c;
    for (const auto& op : alignment) {
        switch (op.kind) {
        case EditKind::match: ++c.matches; break;
        case EditKind::substitute: ++c.substitutions; break;
        case EditKind::del: ++c.deletions; break;
        case EditKind::insert: ++c.insertions; break;
        }
    }
    return c;
}

// (S + D + I) / N
inline double wer(const Alignment& alignment) {
    const auto c = count_edits(alignment);
    if (c.reference_length() == 0) throw DomainError("wer: alignment has no reference words");
    return static_cast<double>(c.errors()) / static_cast<double>(c.reference_length());
}

// Numerator and denominator of the weighted rate, kept separate so corpus
// totals can be pooled.
struct WeightedErrors {
    double charged = 0.0;
    double total = 0.0;

    double rate() const { return total > 0.0 ? charged / total : 0.0; }
};

namespace detail {

// Importances are divided by `unit` before summing.
inline WeightedErrors weighted_sums(const Alignment& alignment, std::span<const double> importance, double unit) {
    const auto c = count_edits(alignment);
    if (importance.size() != c.reference_length()) {
        throw DomainError("weighted_wer: " + std::to_string(importance.size()) + " importance scores for " +
                          std::to_string(c.reference_length()) + " reference words");
    }
    WeightedErrors w;
    for (double s : importance) w.total += s / unit;
    for (const auto& op : alignment) {
        if (op.kind == EditKind::substitute || op.kind == EditKind::del) w.charged += importance[*op.ref_index] / unit;
    }
    const double mean = w.total / static_cast<double>(importance.size());
    const double inserted = static_cast<double>(c.insertions) * mean;
    w.charged += inserted;
    w.total += inserted;
    return w;
}

} // namespace detail

inline WeightedErrors weighted_errors(const Alignment& alignment, std::span<const double> importance) {
    return detail::weighted_sums(alignment, importance, 1.0);
}

// 0 when the reference carries no importance at all (insertions are then free too).
// The rate is scale free, so the sums are taken relative to the largest
// importance; a uniform reference then reduces to exact integer counts.
inline double weighted_wer(const Alignment& alignment, std::span<const double> importance) {
    double top = 0.0;
    for (double s : importance) top = std::max(top, s);
    if (!(top > 0.0)) return weighted_errors(alignment, importance).rate();
    return detail::weighted_sums(alignment, importance, top).rate();
}

inline double weighted_wer(const Alignment& alignment, const ScoredReference& ref) {
    if (ref.tokens.size() != ref.importance.size()) {
        throw DomainError("weighted_wer: scored reference has " + std::to_string(ref.tokens.size()) + " tokens but " +
                          std::to_string(ref.importance.size()) + " scores");
    }
    return weighted_wer(alignment, ref.importance);
}

} // namespace wimp
