#pragma once

#include <cstdint>
#include <vector>

#include "rankwatch/ingestion.hpp"
#include "rankwatch/random.hpp"

namespace rankwatch {

/// Pareto-intensity Poisson traffic with one multiplicative change-point.
struct SynthConfig {
    int dim = 1000;              // D
    int bins = 60;               // P
    double pareto_shape = 2.5;
    double pareto_scale = 0.72;
    int change_rank = 500;       // i0, 1-based rank in the descending intensities
    int change_bin = 35;         // j0: last bin at the base rate
    double factor = 7.0;         // eta
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticDataset {
    int dim = 0;
    int bins = 0;
    std::vector<Count> y;             // row-major dim x bins
    std::vector<double> intensities;  // descending
    int change_rank = 1;
    int change_bin = 1;
    double factor = 1.0;

    Count at(int row, int bin) const { return y[static_cast<std::size_t>(row) * bins + bin]; }
    std::span<const Count> row(int r) const {
        return {y.data() + static_cast<std::size_t>(r) * bins, static_cast<std::size_t>(bins)};
    }
    /// Key under which the changed row appears in to_window_batch().
    Key anomalous_key() const { return static_cast<Key>(change_rank); }
};

/// Inverse CDF of the density shape*scale / (1 + scale x)^(1 + shape), x > 0.
double sample_pareto(double u, double shape, double scale);

/// Exact Poisson draw: sequential inversion for small means, Hormann's PTRS
/// transformed rejection for mean >= 10.
Count sample_poisson(double mean, Rng& rng);

/// Intensities come from one substream, row r from substream r + 1.
SyntheticDataset generate(const SynthConfig& cfg);

/// Row r (0-based) becomes key r + 1, so keys equal intensity ranks. Every
/// row is kept, including all-zero ones.
WindowBatch to_window_batch(const SyntheticDataset& ds);

}  // namespace rankwatch
