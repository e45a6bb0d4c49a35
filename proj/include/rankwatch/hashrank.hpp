#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "rankwatch/ingestion.hpp"
#include "rankwatch/rank_test.hpp"

namespace rankwatch {

__extension__ using uint128 = unsigned __int128;

inline constexpr std::uint64_t mersenne_61 = (std::uint64_t{1} << 61) - 1;

/// (a * b) mod 2^61 - 1 for a, b < 2^61 - 1.
constexpr std::uint64_t mul_mod_mersenne(std::uint64_t a, std::uint64_t b) {
    const uint128 prod = static_cast<uint128>(a) * b;
    std::uint64_t r = static_cast<std::uint64_t>(prod & mersenne_61) +
                      static_cast<std::uint64_t>(prod >> 61);
    r = (r & mersenne_61) + (r >> 61);
    return r >= mersenne_61 ? r - mersenne_61 : r;
}

/// One member of the 4-universal family x -> 1 + ((a0 + a1 x + a2 x^2 + a3 x^3) mod p) mod K.
struct HashCoefficients {
    std::array<std::uint64_t, 4> a{};
    std::uint32_t k_buckets = 2;

    friend bool operator==(const HashCoefficients&, const HashCoefficients&) = default;
};

/// Bucket in 1..K.
std::uint32_t hash_eval(const HashCoefficients& coeffs, Key x);

/// 4 * rows uniform draws in [0, p - 1], deterministic in `seed`.
std::vector<HashCoefficients> sample_coefficients(std::uint64_t seed, int rows, int buckets);

/// 1-based sketch cell.
struct Cell {
    int row = 1;
    int bucket = 1;
    auto operator<=>(const Cell&) const = default;
};

/// L x K table of aggregated series plus the keys hashed into each cell.
class SketchTable {
public:
    SketchTable(int rows, int buckets, int bins);

    int rows() const { return rows_; }
    int buckets() const { return buckets_; }
    int bins() const { return bins_; }

    std::span<const Count> series(Cell c) const;
    std::span<Count> series(Cell c);
    const std::vector<Key>& cell_keys(Cell c) const;
    std::vector<Key>& cell_keys(Cell c);

private:
    std::size_t index(Cell c) const;

    int rows_;
    int buckets_;
    int bins_;
    std::vector<Count> series_;
    std::vector<std::vector<Key>> keys_;
};

SketchTable build_sketch(const WindowBatch& batch, std::span<const HashCoefficients> coeffs,
                         int bins);

/// Uncensored test of every cell, row-major (row 1 bucket 1, row 1 bucket 2, ...).
std::vector<TestOutcome> score_cells(const SketchTable& table);

std::set<Cell> flagged_cells(const SketchTable& table, std::span<const TestOutcome> outcomes,
                             double level_alpha);

/// Cells whose series tests below `level_alpha`.
std::set<Cell> detect_cells(const SketchTable& table, double level_alpha);

/// Keys lying in a flagged cell of every row, ascending.
std::vector<Key> invert(const SketchTable& table, const std::set<Cell>& flagged);

/// HashRank over one window. Each suspect reports the flagged cell with the
/// smallest p-value among its cells (earliest row on ties).
std::vector<Alarm> run_window_hashrank(const WindowBatch& batch,
                                       std::span<const HashCoefficients> coeffs,
                                       double level_alpha);

}  // namespace rankwatch
