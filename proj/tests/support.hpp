#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rankwatch/ingestion.hpp"
#include "rankwatch/rank_test.hpp"

namespace testkit {

struct BruteOutcome {
    std::vector<std::int64_t> u;
    std::vector<double> s;
    double w = 0.0;
    int t_hat = 1;
    bool degenerate = false;
};

/// Full pairwise score matrix, then row sums, cumulative path and argmax.
inline BruteOutcome brute_force(const std::vector<double>& x, const std::vector<std::uint8_t>& obs) {
    const std::size_t n = x.size();
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            int v = 0;
            if (x[s] > x[t] && obs[s]) v += 1;
            if (x[s] < x[t] && obs[t]) v -= 1;
            a[s][t] = v;
        }
    }
    BruteOutcome out;
    out.u.assign(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) out.u[s] += a[s][t];
    }
    std::int64_t denom = 0;
    for (auto v : out.u) denom += v * v;
    out.s.assign(n, 0.0);
    if (denom == 0) {
        out.degenerate = true;
        return out;
    }
    std::int64_t run = 0;
    for (std::size_t t = 0; t < n; ++t) {
        run += out.u[t];
        out.s[t] = static_cast<double>(run) / std::sqrt(static_cast<double>(denom));
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (std::fabs(out.s[t]) > out.w) {
            out.w = std::fabs(out.s[t]);
            out.t_hat = static_cast<int>(t) + 1;
        }
    }
    return out;
}

/// 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 b^2), plain partial sums in long double.
inline double kolmogorov_series(double b, int terms = 2000) {
    long double sum = 0.0L;
    for (int j = 1; j <= terms; ++j) {
        const long double term = std::exp(-2.0L * j * j * static_cast<long double>(b) * b);
        sum += (j % 2 == 1) ? term : -term;
    }
    return static_cast<double>(2.0L * sum);
}

/// Random censored series with many ties: values drawn from a small range.
inline rankwatch::CensoredSeries random_censored(std::mt19937_64& gen, int n, int levels = 6) {
    std::uniform_int_distribution<int> val(0, levels - 1);
    std::bernoulli_distribution observed(0.7);
    rankwatch::CensoredSeries s;
    s.key = static_cast<rankwatch::Key>(gen() & 0xffff);
    for (int i = 0; i < n; ++i) {
        s.x.push_back(static_cast<double>(val(gen)));
        s.observed.push_back(observed(gen) ? 1 : 0);
    }
    return s;
}

/// Random window of `dim` keys drawn from [1, key_range], sparse counts.
inline rankwatch::WindowBatch random_batch(std::mt19937_64& gen, int dim, int bins,
                                           rankwatch::Key key_range = 100000) {
    std::uniform_int_distribution<rankwatch::Key> key(1, key_range);
    std::uniform_int_distribution<int> count(0, 20);
    std::bernoulli_distribution zero(0.4);
    std::vector<rankwatch::Key> keys;
    while (static_cast<int>(keys.size()) < dim) {
        const auto k = key(gen);
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    rankwatch::WindowBatch b;
    b.bins = bins;
    for (auto k : keys) {
        rankwatch::BinSeries s{k, std::vector<rankwatch::Count>(bins, 0)};
        for (auto& v : s.values) v = zero(gen) ? 0 : static_cast<rankwatch::Count>(count(gen));
        b.series.push_back(std::move(s));
    }
    return b;
}

}  // namespace testkit
