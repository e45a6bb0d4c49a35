#pragma once

#include <optional>
#include <vector>

#include "rankwatch/ingestion.hpp"
#include "rankwatch/rank_test.hpp"

namespace rankwatch {

struct TopEntry {
    Key key = 0;
    Count value = 0;
    friend bool operator==(const TopEntry&, const TopEntry&) = default;
};

/// The M largest positive counts of one bin, largest first; ties go to the
/// smaller key. censor_bound is the smallest kept value, or 0 when fewer than
/// M keys had traffic in the bin.
struct TopSet {
    int bin = 1;
    std::vector<TopEntry> entries;
    Count censor_bound = 0;

    const TopEntry* find(Key key) const;
};

/// Per-bin record filtering. Keeps O(M * P) state regardless of batch size.
std::vector<TopSet> top_filter(const WindowBatch& batch, int top_m);
std::vector<TopSet> top_filter(const WindowBatch& batch, const WindowConfig& cfg);

/// Union of the top-M' keys of every bin, in first-appearance order (bin-major).
std::vector<Key> candidates(const std::vector<TopSet>& tops, int keep_mprime);

/// First `n` distinct keys met walking rank-major: all rank-1 keys over the
/// bins, then all rank-2 keys, and so on.
std::vector<Key> candidates_budget(const std::vector<TopSet>& tops, int n);

/// Censored series of `key`: the stored value where the key made the top set,
/// else the bin's censor bound flagged as censored. Throws std::invalid_argument
/// for a key absent from the batch.
CensoredSeries censor(const WindowBatch& batch, const std::vector<TopSet>& tops, Key key);

struct ScoredSeries {
    Key key = 0;
    TestOutcome outcome;
};

/// Runs the censored test on every candidate, in candidate order. With a
/// budget the rank-major selection replaces the M' rule.
std::vector<ScoredSeries> score_window(const WindowBatch& batch, const WindowConfig& cfg,
                                       std::optional<int> budget = std::nullopt);

/// TopRank over one window; alarms sorted by ascending p-value.
std::vector<Alarm> run_window(const WindowBatch& batch, const WindowConfig& cfg,
                              std::optional<int> budget = std::nullopt);

}  // namespace rankwatch
