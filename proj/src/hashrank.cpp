#include "rankwatch/hashrank.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "rankwatch/random.hpp"

namespace rankwatch {

std::uint32_t hash_eval(const HashCoefficients& coeffs, Key x) {
    // Horner: ((a3 x + a2) x + a1) x + a0, every step reduced mod p.
    const std::uint64_t xv = x;
    std::uint64_t acc = coeffs.a[3];
    for (int j = 2; j >= 0; --j) {
        acc = mul_mod_mersenne(acc, xv) + coeffs.a[j];
        if (acc >= mersenne_61) acc -= mersenne_61;
    }
    return 1 + static_cast<std::uint32_t>(acc % coeffs.k_buckets);
}

std::vector<HashCoefficients> sample_coefficients(std::uint64_t seed, int rows, int buckets) {
    if (rows < 1) throw std::invalid_argument("need at least one hash row");
    if (buckets < 2) throw std::invalid_argument("need at least two buckets");
    Rng rng(seed);
    std::vector<HashCoefficients> out(rows);
    for (auto& h : out) {
        h.k_buckets = static_cast<std::uint32_t>(buckets);
        for (auto& a : h.a) {
            do { a = rng.next() >> 3; } while (a >= mersenne_61);
        }
    }
    return out;
}

SketchTable::SketchTable(int rows, int buckets, int bins)
    : rows_(rows), buckets_(buckets), bins_(bins) {
    if (rows < 1 || buckets < 1 || bins < 0) throw std::invalid_argument("bad sketch dimensions");
    series_.assign(static_cast<std::size_t>(rows) * buckets * bins, 0);
    keys_.resize(static_cast<std::size_t>(rows) * buckets);
}

std::size_t SketchTable::index(Cell c) const {
    if (c.row < 1 || c.row > rows_ || c.bucket < 1 || c.bucket > buckets_) {
        throw std::out_of_range("sketch cell out of range");
    }
    return static_cast<std::size_t>(c.row - 1) * buckets_ + (c.bucket - 1);
}

std::span<const Count> SketchTable::series(Cell c) const {
    return {series_.data() + index(c) * bins_, static_cast<std::size_t>(bins_)};
}

std::span<Count> SketchTable::series(Cell c) {
    return {series_.data() + index(c) * bins_, static_cast<std::size_t>(bins_)};
}

const std::vector<Key>& SketchTable::cell_keys(Cell c) const { return keys_[index(c)]; }
std::vector<Key>& SketchTable::cell_keys(Cell c) { return keys_[index(c)]; }

SketchTable build_sketch(const WindowBatch& batch, std::span<const HashCoefficients> coeffs,
                         int bins) {
    if (coeffs.empty()) throw std::invalid_argument("need at least one hash row");
    const int buckets = static_cast<int>(coeffs.front().k_buckets);
    for (const auto& h : coeffs) {
        if (static_cast<int>(h.k_buckets) != buckets) {
            throw std::invalid_argument("hash rows disagree on bucket count");
        }
    }
    SketchTable table(static_cast<int>(coeffs.size()), buckets, bins);
    for (const auto& s : batch.series) {
        if (s.values.size() != static_cast<std::size_t>(bins)) {
            throw std::invalid_argument("series length differs from window length");
        }
        for (std::size_t l = 0; l < coeffs.size(); ++l) {
            const Cell cell{static_cast<int>(l) + 1, static_cast<int>(hash_eval(coeffs[l], s.key))};
            auto dst = table.series(cell);
            for (int t = 0; t < bins; ++t) dst[t] += s.values[t];
            table.cell_keys(cell).push_back(s.key);
        }
    }
    return table;
}

std::vector<TestOutcome> score_cells(const SketchTable& table) {
    std::vector<TestOutcome> out;
    out.reserve(static_cast<std::size_t>(table.rows()) * table.buckets());
    for (int l = 1; l <= table.rows(); ++l) {
        for (int k = 1; k <= table.buckets(); ++k) {
            out.push_back(statistic_uncensored(table.series({l, k})));
        }
    }
    return out;
}

std::set<Cell> flagged_cells(const SketchTable& table, std::span<const TestOutcome> outcomes,
                             double level_alpha) {
    std::set<Cell> flagged;
    std::size_t i = 0;
    for (int l = 1; l <= table.rows(); ++l) {
        for (int k = 1; k <= table.buckets(); ++k, ++i) {
            const auto& o = outcomes[i];
            if (!o.degenerate && o.p_value < level_alpha) flagged.insert({l, k});
        }
    }
    return flagged;
}

std::set<Cell> detect_cells(const SketchTable& table, double level_alpha) {
    const auto outcomes = score_cells(table);
    return flagged_cells(table, outcomes, level_alpha);
}

std::vector<Key> invert(const SketchTable& table, const std::set<Cell>& flagged) {
    std::vector<Key> result;
    for (int l = 1; l <= table.rows(); ++l) {
        std::vector<Key> row_union;
        for (int k = 1; k <= table.buckets(); ++k) {
            if (!flagged.contains({l, k})) continue;
            const auto& keys = table.cell_keys({l, k});
            row_union.insert(row_union.end(), keys.begin(), keys.end());
        }
        std::sort(row_union.begin(), row_union.end());
        row_union.erase(std::unique(row_union.begin(), row_union.end()), row_union.end());
        if (l == 1) {
            result = std::move(row_union);
        } else {
            std::vector<Key> meet;
            std::set_intersection(result.begin(), result.end(), row_union.begin(), row_union.end(),
                                  std::back_inserter(meet));
            result = std::move(meet);
        }
        if (result.empty()) break;
    }
    return result;
}

std::vector<Alarm> run_window_hashrank(const WindowBatch& batch,
                                       std::span<const HashCoefficients> coeffs,
                                       double level_alpha) {
    const int bins = batch.bins > 0 ? batch.bins
                     : batch.series.empty() ? 0
                                            : static_cast<int>(batch.series.front().values.size());
    std::vector<Alarm> alarms;
    if (bins < 2) return alarms;
    const auto table = build_sketch(batch, coeffs, bins);
    const auto outcomes = score_cells(table);
    const auto flagged = flagged_cells(table, outcomes, level_alpha);
    const auto suspects = invert(table, flagged);

    for (const Key key : suspects) {
        const TestOutcome* best = nullptr;
        for (std::size_t l = 0; l < coeffs.size(); ++l) {
            const int bucket = static_cast<int>(hash_eval(coeffs[l], key));
            const auto& o = outcomes[l * table.buckets() + (bucket - 1)];
            if (best == nullptr || o.p_value < best->p_value) best = &o;
        }
        alarms.push_back(Alarm{key, batch.window_index, best->change_bin, best->p_value,
                               best->w_stat, Method::hashrank});
    }
    sort_by_p_value(alarms);
    return alarms;
}

}  // namespace rankwatch
