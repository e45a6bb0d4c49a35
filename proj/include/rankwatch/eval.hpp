#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rankwatch/synth.hpp"
#include "rankwatch/toprank.hpp"

namespace rankwatch {

/// No-reduction baseline: the uncensored test on every key's raw series.
std::vector<ScoredSeries> score_comprehensive(const WindowBatch& batch);
std::vector<Alarm> comprehensive(const WindowBatch& batch, double level_alpha);

struct RocPoint {
    double threshold = 0.0;
    double fa_rate = 0.0;   // false alarms / (D - 1), run average
    double det_rate = 0.0;  // fraction of runs alarming the anomalous key
};

/// 0 followed by 30 log-spaced thresholds from 1e-12 to 1 inclusive.
std::vector<double> default_thresholds();

struct RocConfig {
    SynthConfig synth;
    int runs = 100;
    std::vector<double> thresholds = default_thresholds();
    int top_m = 50;
    std::optional<int> budget;  // TopRank series budget; defaults to rows * buckets
    int rows = 8;
    int buckets = 17;
    int threads = 1;

    int series_budget() const { return budget.value_or(rows * buckets); }
    void validate() const;
};

/// Data seed of run r is synth.seed + r; hash seed is synth.seed + 10^6 + r.
std::uint64_t run_data_seed(const RocConfig& cfg, int run);
std::uint64_t run_hash_seed(const RocConfig& cfg, int run);

/// Per-run outcome: for each threshold, number of false alarms and whether
/// the anomalous key was alarmed.
struct RunTally {
    std::vector<int> false_alarms;
    std::vector<std::uint8_t> detected;
    int series_tested = 0;
};

RunTally evaluate_run(const RocConfig& cfg, Method method, int run);

/// Monte Carlo ROC curve of one method.
std::vector<RocPoint> roc(const RocConfig& cfg, Method method);

}  // namespace rankwatch
