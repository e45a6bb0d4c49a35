#include "rankwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace rankwatch {

void SynthConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be at least 1");
    if (bins < 2) throw std::invalid_argument("bins must be at least 2");
    if (change_rank < 1 || change_rank > dim) throw std::invalid_argument("change_rank must lie in [1, dim]");
    if (change_bin < 1 || change_bin >= bins) throw std::invalid_argument("change_bin must lie in [1, bins)");
    if (!(factor > 0.0)) throw std::invalid_argument("factor must be positive");
    if (!(pareto_shape > 1.0)) throw std::invalid_argument("pareto_shape must exceed 1");
    if (!(pareto_scale > 0.0)) throw std::invalid_argument("pareto_scale must be positive");
}

double sample_pareto(double u, double shape, double scale) {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in [0, 1)");
    return (std::pow(1.0 - u, -1.0 / shape) - 1.0) / scale;
}

Count sample_poisson(double mean, Rng& rng) {
    if (!(mean >= 0.0)) throw std::invalid_argument("Poisson mean must be nonnegative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        const double u = rng.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        Count k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform_open();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<Count>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<Count>(k);
        }
    }
}

SyntheticDataset generate(const SynthConfig& cfg) {
    cfg.validate();
    SyntheticDataset ds;
    ds.dim = cfg.dim;
    ds.bins = cfg.bins;
    ds.change_rank = cfg.change_rank;
    ds.change_bin = cfg.change_bin;
    ds.factor = cfg.factor;

    Rng intensity_rng(substream_seed(cfg.seed, 0));
    ds.intensities.resize(cfg.dim);
    for (auto& theta : ds.intensities) {
        theta = sample_pareto(intensity_rng.uniform(), cfg.pareto_shape, cfg.pareto_scale);
    }
    std::sort(ds.intensities.begin(), ds.intensities.end(), std::greater<>());

    ds.y.resize(static_cast<std::size_t>(cfg.dim) * cfg.bins);
    const int anomalous_row = cfg.change_rank - 1;
    for (int r = 0; r < cfg.dim; ++r) {
        Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(r) + 1));
        const double base = ds.intensities[r];
        for (int j = 0; j < cfg.bins; ++j) {
            const bool after_change = r == anomalous_row && j >= cfg.change_bin;
            ds.y[static_cast<std::size_t>(r) * cfg.bins + j] =
                sample_poisson(after_change ? cfg.factor * base : base, rng);
        }
    }
    return ds;
}

WindowBatch to_window_batch(const SyntheticDataset& ds) {
    WindowBatch batch;
    batch.bins = ds.bins;
    batch.series.reserve(ds.dim);
    for (int r = 0; r < ds.dim; ++r) {
        const auto row = ds.row(r);
        batch.series.push_back({static_cast<Key>(r + 1), std::vector<Count>(row.begin(), row.end())});
    }
    return batch;
}

}  // namespace rankwatch
