#include "rankwatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rankwatch/hashrank.hpp"
#include "rankwatch/parallel.hpp"

namespace rankwatch {

std::vector<ScoredSeries> score_comprehensive(const WindowBatch& batch) {
    std::vector<ScoredSeries> out;
    out.reserve(batch.series.size());
    for (const auto& s : batch.series) {
        out.push_back({s.key, statistic_uncensored(std::span<const Count>(s.values))});
    }
    return out;
}

std::vector<Alarm> comprehensive(const WindowBatch& batch, double level_alpha) {
    std::vector<Alarm> alarms;
    for (const auto& scored : score_comprehensive(batch)) {
        if (auto a = to_alarm(scored.outcome, scored.key, level_alpha, Method::comprehensive,
                              batch.window_index)) {
            alarms.push_back(*a);
        }
    }
    sort_by_p_value(alarms);
    return alarms;
}

std::vector<double> default_thresholds() {
    constexpr int count = 30;
    std::vector<double> out{0.0};
    for (int i = 0; i < count; ++i) {
        const double exponent = -12.0 + 12.0 * i / (count - 1);
        out.push_back(i == count - 1 ? 1.0 : std::pow(10.0, exponent));
    }
    return out;
}

void RocConfig::validate() const {
    synth.validate();
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (thresholds.empty()) throw std::invalid_argument("need at least one threshold");
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw std::invalid_argument("thresholds must be sorted ascending");
    }
    if (thresholds.front() < 0.0 || thresholds.back() > 1.0) {
        throw std::invalid_argument("thresholds must lie in [0, 1]");
    }
    if (top_m < 1) throw std::invalid_argument("top_m must be at least 1");
    if (rows < 1 || buckets < 2) throw std::invalid_argument("need rows >= 1 and buckets >= 2");
    if (series_budget() < 1) throw std::invalid_argument("budget must be at least 1");
    if (synth.dim < 2) throw std::invalid_argument("ROC needs dim >= 2");
}

std::uint64_t run_data_seed(const RocConfig& cfg, int run) {
    return cfg.synth.seed + static_cast<std::uint64_t>(run);
}

std::uint64_t run_hash_seed(const RocConfig& cfg, int run) {
    return cfg.synth.seed + 1'000'000ULL + static_cast<std::uint64_t>(run);
}

namespace {

void tally_scored(const std::vector<ScoredSeries>& scored, Key target,
                  const std::vector<double>& thresholds, RunTally& tally) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        int false_alarms = 0;
        bool hit = false;
        for (const auto& s : scored) {
            if (s.outcome.degenerate || !(s.outcome.p_value < thresholds[i])) continue;
            if (s.key == target) {
                hit = true;
            } else {
                ++false_alarms;
            }
        }
        tally.false_alarms[i] = false_alarms;
        tally.detected[i] = hit;
    }
    tally.series_tested = static_cast<int>(scored.size());
}

}  // namespace

RunTally evaluate_run(const RocConfig& cfg, Method method, int run) {
    SynthConfig synth = cfg.synth;
    synth.seed = run_data_seed(cfg, run);
    const auto dataset = generate(synth);
    const auto batch = to_window_batch(dataset);
    const Key target = dataset.anomalous_key();

    RunTally tally;
    tally.false_alarms.assign(cfg.thresholds.size(), 0);
    tally.detected.assign(cfg.thresholds.size(), 0);

    switch (method) {
        case Method::comprehensive:
            tally_scored(score_comprehensive(batch), target, cfg.thresholds, tally);
            break;
        case Method::toprank: {
            WindowConfig wc;
            wc.bins_per_window = synth.bins;
            wc.top_m = cfg.top_m;
            wc.keep_mprime = 1;
            tally_scored(score_window(batch, wc, cfg.series_budget()), target, cfg.thresholds, tally);
            break;
        }
        case Method::hashrank: {
            const auto coeffs = sample_coefficients(run_hash_seed(cfg, run), cfg.rows, cfg.buckets);
            const auto table = build_sketch(batch, coeffs, synth.bins);
            const auto outcomes = score_cells(table);
            for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
                const auto suspects = invert(table, flagged_cells(table, outcomes, cfg.thresholds[i]));
                const bool hit = std::binary_search(suspects.begin(), suspects.end(), target);
                tally.detected[i] = hit;
                tally.false_alarms[i] = static_cast<int>(suspects.size()) - (hit ? 1 : 0);
            }
            tally.series_tested = static_cast<int>(outcomes.size());
            break;
        }
    }
    return tally;
}

std::vector<RocPoint> roc(const RocConfig& cfg, Method method) {
    cfg.validate();
    std::vector<RunTally> tallies(cfg.runs);
    parallel_for(tallies.size(), cfg.threads,
                 [&](std::size_t r) { tallies[r] = evaluate_run(cfg, method, static_cast<int>(r)); });

    // Summed in run order so the result does not depend on thread count.
    const double negatives = cfg.synth.dim - 1.0;
    std::vector<RocPoint> curve(cfg.thresholds.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        double fa = 0.0;
        double det = 0.0;
        for (const auto& t : tallies) {
            fa += t.false_alarms[i] / negatives;
            det += t.detected[i];
        }
        curve[i] = {cfg.thresholds[i], fa / cfg.runs, det / cfg.runs};
    }
    return curve;
}

}  // namespace rankwatch
