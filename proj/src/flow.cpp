#include "rankwatch/flow.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rankwatch {

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::tcp: return "TCP";
        case Protocol::udp: return "UDP";
        case Protocol::other: return "OTHER";
    }
    return "OTHER";
}

std::string_view to_string(MetricKind m) {
    switch (m) {
        case MetricKind::syn_flood: return "syn";
        case MetricKind::udp_flood: return "udp";
        case MetricKind::port_scan: return "portscan";
        case MetricKind::net_scan: return "netscan";
    }
    return "syn";
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::toprank: return "toprank";
        case Method::hashrank: return "hashrank";
        case Method::comprehensive: return "full";
    }
    return "toprank";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
    if (text == "TCP") return Protocol::tcp;
    if (text == "UDP") return Protocol::udp;
    if (text == "OTHER") return Protocol::other;
    return std::nullopt;
}

std::optional<MetricKind> parse_metric(std::string_view text) {
    if (text == "syn") return MetricKind::syn_flood;
    if (text == "udp") return MetricKind::udp_flood;
    if (text == "portscan") return MetricKind::port_scan;
    if (text == "netscan") return MetricKind::net_scan;
    return std::nullopt;
}

void FlowRecord::validate() const {
    if (!(ts_start <= ts_end)) {
        throw std::invalid_argument("ts_end precedes ts_start");
    }
    if (proto == Protocol::tcp) {
        if (syn + synack + fin + rst > packets) {
            throw std::invalid_argument("TCP flag counters exceed packet count");
        }
    } else if (syn != 0 || synack != 0 || fin != 0 || rst != 0) {
        throw std::invalid_argument("TCP flag counters set on a non-TCP record");
    }
}

void WindowConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (bins_per_window < 2) throw std::invalid_argument("bins_per_window must be at least 2");
    if (top_m < 1) throw std::invalid_argument("top_m must be at least 1");
    if (keep_mprime < 1 || keep_mprime > top_m) {
        throw std::invalid_argument("keep_mprime must lie in [1, top_m]");
    }
    if (!(level_alpha > 0.0 && level_alpha < 1.0)) {
        throw std::invalid_argument("level_alpha must lie in (0, 1)");
    }
}

std::optional<Contribution> metric_key_value(const FlowRecord& rec, MetricKind metric) {
    switch (metric) {
        case MetricKind::syn_flood:
            if (rec.proto != Protocol::tcp || rec.syn == 0) return std::nullopt;
            return Contribution{rec.dst_ip, Additive{rec.syn}};
        case MetricKind::udp_flood:
            if (rec.proto != Protocol::udp || rec.packets == 0) return std::nullopt;
            return Contribution{rec.dst_ip, Additive{rec.packets}};
        case MetricKind::port_scan:
            // ports only exist for TCP and UDP
            if (rec.proto == Protocol::other) return std::nullopt;
            return Contribution{rec.dst_ip, DistinctToken{rec.dst_port}};
        case MetricKind::net_scan:
            return Contribution{rec.src_ip, DistinctToken{rec.dst_ip}};
    }
    return std::nullopt;
}

void sort_by_p_value(std::vector<Alarm>& alarms) {
    std::stable_sort(alarms.begin(), alarms.end(), [](const Alarm& a, const Alarm& b) {
        if (a.p_value != b.p_value) return a.p_value < b.p_value;
        return a.key < b.key;
    });
}

}  // namespace rankwatch
