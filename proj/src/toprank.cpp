#include "rankwatch/toprank.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace rankwatch {

namespace {

bool ranks_before(const TopEntry& a, const TopEntry& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.key < b.key;
}

int batch_bins(const WindowBatch& batch) {
    if (batch.bins > 0) return batch.bins;
    if (!batch.series.empty()) return static_cast<int>(batch.series.front().values.size());
    return 0;
}

}  // namespace

const TopEntry* TopSet::find(Key key) const {
    for (const auto& e : entries) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

std::vector<TopSet> top_filter(const WindowBatch& batch, int top_m) {
    if (top_m < 1) throw std::invalid_argument("top_m must be at least 1");
    const int bins = batch_bins(batch);
    const auto m = static_cast<std::size_t>(top_m);

    std::vector<TopSet> tops(bins);
    std::vector<TopEntry> active;
    for (int t = 0; t < bins; ++t) {
        active.clear();
        for (const auto& s : batch.series) {
            if (s.values.size() != static_cast<std::size_t>(bins)) {
                throw std::invalid_argument("series length differs from window length");
            }
            if (s.values[t] > 0) active.push_back({s.key, s.values[t]});
        }
        auto& top = tops[t];
        top.bin = t + 1;
        const std::size_t kept = std::min(m, active.size());
        std::partial_sort(active.begin(), active.begin() + kept, active.end(), ranks_before);
        top.entries.assign(active.begin(), active.begin() + kept);
        top.censor_bound = (kept == m) ? top.entries.back().value : 0;
    }
    return tops;
}

std::vector<TopSet> top_filter(const WindowBatch& batch, const WindowConfig& cfg) {
    return top_filter(batch, cfg.top_m);
}

std::vector<Key> candidates(const std::vector<TopSet>& tops, int keep_mprime) {
    if (keep_mprime < 1) throw std::invalid_argument("keep_mprime must be at least 1");
    std::vector<Key> out;
    std::unordered_set<Key> seen;
    const auto limit = static_cast<std::size_t>(keep_mprime);
    for (const auto& top : tops) {
        const std::size_t n = std::min(limit, top.entries.size());
        for (std::size_t r = 0; r < n; ++r) {
            if (seen.insert(top.entries[r].key).second) out.push_back(top.entries[r].key);
        }
    }
    return out;
}

std::vector<Key> candidates_budget(const std::vector<TopSet>& tops, int n) {
    if (n < 1) throw std::invalid_argument("budget must be at least 1");
    std::vector<Key> out;
    std::unordered_set<Key> seen;
    std::size_t depth = 0;
    for (const auto& top : tops) depth = std::max(depth, top.entries.size());

    const auto budget = static_cast<std::size_t>(n);
    for (std::size_t r = 0; r < depth; ++r) {
        for (const auto& top : tops) {
            if (r >= top.entries.size()) continue;
            if (seen.insert(top.entries[r].key).second) {
                out.push_back(top.entries[r].key);
                if (out.size() == budget) return out;
            }
        }
    }
    return out;
}

CensoredSeries censor(const WindowBatch& batch, const std::vector<TopSet>& tops, Key key) {
    if (batch.find(key) == nullptr) {
        throw std::invalid_argument("key " + std::to_string(key) + " is not in the window");
    }
    CensoredSeries out;
    out.key = key;
    out.x.resize(tops.size());
    out.observed.resize(tops.size());
    for (std::size_t t = 0; t < tops.size(); ++t) {
        if (const auto* e = tops[t].find(key)) {
            out.x[t] = static_cast<double>(e->value);
            out.observed[t] = 1;
        } else {
            out.x[t] = static_cast<double>(tops[t].censor_bound);
            out.observed[t] = 0;
        }
    }
    return out;
}

std::vector<ScoredSeries> score_window(const WindowBatch& batch, const WindowConfig& cfg,
                                       std::optional<int> budget) {
    cfg.validate();
    const auto tops = top_filter(batch, cfg);
    const auto keys = budget ? candidates_budget(tops, *budget) : candidates(tops, cfg.keep_mprime);
    std::vector<ScoredSeries> out;
    out.reserve(keys.size());
    for (const Key key : keys) {
        out.push_back({key, statistic(censor(batch, tops, key))});
    }
    return out;
}

std::vector<Alarm> run_window(const WindowBatch& batch, const WindowConfig& cfg,
                              std::optional<int> budget) {
    std::vector<Alarm> alarms;
    for (const auto& scored : score_window(batch, cfg, budget)) {
        if (auto alarm = to_alarm(scored.outcome, scored.key, cfg.level_alpha, Method::toprank,
                                  batch.window_index)) {
            alarms.push_back(*alarm);
        }
    }
    sort_by_p_value(alarms);
    return alarms;
}

}  // namespace rankwatch
