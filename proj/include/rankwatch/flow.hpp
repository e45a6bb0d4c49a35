#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace rankwatch {

/// IPv4-style dimension key (address as a 32-bit unsigned integer).
using Key = std::uint32_t;
using Count = std::uint64_t;

enum class Protocol { tcp, udp, other };

/// Which counter is tracked and which address keys it.
enum class MetricKind {
    syn_flood,  // key = dst_ip, value = SYN packets
    udp_flood,  // key = dst_ip, value = UDP packets
    port_scan,  // key = dst_ip, value = distinct dst_port
    net_scan,   // key = src_ip, value = distinct dst_ip
};

enum class Method { toprank, hashrank, comprehensive };

std::string_view to_string(Protocol p);
std::string_view to_string(MetricKind m);
std::string_view to_string(Method m);

std::optional<Protocol> parse_protocol(std::string_view text);
std::optional<MetricKind> parse_metric(std::string_view text);

/// One NetFlow-like record. TCP flag counters are zero for non-TCP flows.
struct FlowRecord {
    double ts_start = 0.0;
    double ts_end = 0.0;
    Key src_ip = 0;
    Key dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    Protocol proto = Protocol::other;
    Count packets = 0;
    Count syn = 0;
    Count synack = 0;
    Count fin = 0;
    Count rst = 0;

    /// Throws std::invalid_argument when the record violates its invariants.
    void validate() const;

    friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

/// Binning and detection parameters of one observation window.
struct WindowConfig {
    double delta = 1.0;        // bin length in seconds
    int bins_per_window = 60;  // P
    int top_m = 10;            // M
    int keep_mprime = 1;       // M'
    double level_alpha = 1e-3;
    MetricKind metric = MetricKind::syn_flood;

    double window_length() const { return delta * bins_per_window; }
    void validate() const;
};

struct Additive {
    Count count = 0;
    friend bool operator==(const Additive&, const Additive&) = default;
};

/// A port or address to be counted once per (key, bin).
struct DistinctToken {
    std::uint32_t token = 0;
    friend bool operator==(const DistinctToken&, const DistinctToken&) = default;
};

struct Contribution {
    Key key = 0;
    std::variant<Additive, DistinctToken> value;
    friend bool operator==(const Contribution&, const Contribution&) = default;
};

/// Maps a record to the key and contribution it makes under `metric`, or
/// nothing when the record does not count toward the metric.
std::optional<Contribution> metric_key_value(const FlowRecord& rec, MetricKind metric);

/// Per-key count series N_i(1..P) inside one window.
struct BinSeries {
    Key key = 0;
    std::vector<Count> values;

    friend bool operator==(const BinSeries&, const BinSeries&) = default;
};

struct Alarm {
    Key key = 0;
    int window_index = 0;
    int change_bin = 1;  // 1-based
    double p_value = 1.0;
    double statistic = 0.0;
    Method method = Method::toprank;
};

/// Orders alarms by ascending p-value, then key.
void sort_by_p_value(std::vector<Alarm>& alarms);

}  // namespace rankwatch
