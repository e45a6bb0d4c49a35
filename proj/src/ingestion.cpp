#include "rankwatch/ingestion.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <type_traits>
#include <unordered_set>

namespace rankwatch {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* name) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, std::string("cannot parse ") + name + " from '" + std::string(field) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw ParseError(line, std::string(name) + " is not finite");
        }
    }
    return value;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::string shortest(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

const BinSeries* WindowBatch::find(Key key) const {
    const auto it = std::lower_bound(series.begin(), series.end(), key,
                                     [](const BinSeries& s, Key k) { return s.key < k; });
    if (it == series.end() || it->key != key) return nullptr;
    return &*it;
}

FlowRecord parse_record(std::string_view line, std::size_t line_number) {
    const auto f = split_fields(line);
    if (f.size() != 12) {
        throw ParseError(line_number, "expected 12 fields, got " + std::to_string(f.size()));
    }
    FlowRecord r;
    r.ts_start = parse_number<double>(f[0], line_number, "ts_start");
    r.ts_end = parse_number<double>(f[1], line_number, "ts_end");
    r.src_ip = parse_number<std::uint32_t>(f[2], line_number, "src_ip");
    r.dst_ip = parse_number<std::uint32_t>(f[3], line_number, "dst_ip");
    r.src_port = parse_number<std::uint16_t>(f[4], line_number, "src_port");
    r.dst_port = parse_number<std::uint16_t>(f[5], line_number, "dst_port");
    const auto proto = parse_protocol(f[6]);
    if (!proto) throw ParseError(line_number, "unknown protocol '" + std::string(f[6]) + "'");
    r.proto = *proto;
    r.packets = parse_number<Count>(f[7], line_number, "packets");
    r.syn = parse_number<Count>(f[8], line_number, "syn");
    r.synack = parse_number<Count>(f[9], line_number, "synack");
    r.fin = parse_number<Count>(f[10], line_number, "fin");
    r.rst = parse_number<Count>(f[11], line_number, "rst");
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(line_number, e.what());
    }
    return r;
}

FlowReadResult read_flow_csv(std::istream& in, ErrorPolicy policy) {
    FlowReadResult result;
    std::string line;
    std::size_t line_number = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (is_blank(line)) continue;
        if (!header_seen) {
            if (trim(line) != flow_csv_header) {
                throw ParseError(line_number, "missing or malformed header");
            }
            header_seen = true;
            continue;
        }
        try {
            result.records.push_back(parse_record(line, line_number));
        } catch (const ParseError& e) {
            if (policy == ErrorPolicy::abort) throw;
            result.skipped.push_back(e);
        }
    }
    if (!header_seen) throw ParseError(line_number, "empty input, header required");
    return result;
}

WindowBatch bin_window(std::span<const FlowRecord> records, const WindowConfig& cfg,
                       int window_index, double origin) {
    cfg.validate();
    const int bins = cfg.bins_per_window;
    WindowBatch batch;
    batch.window_index = window_index;
    batch.start_time = origin + window_index * cfg.window_length();
    batch.bins = bins;

    std::map<Key, std::vector<Count>> totals;
    // (key << 32 | token) already counted, per bin
    std::vector<std::unordered_set<std::uint64_t>> seen(bins);

    const long long first_bin = static_cast<long long>(window_index) * bins;
    for (const auto& rec : records) {
        const auto global = static_cast<long long>(std::floor((rec.ts_start - origin) / cfg.delta));
        const long long t = global - first_bin;
        if (t < 0 || t >= bins) {
            throw std::invalid_argument("record at ts_start=" + shortest(rec.ts_start) +
                                        " lies outside window " + std::to_string(window_index));
        }
        const auto contribution = metric_key_value(rec, cfg.metric);
        if (!contribution) continue;
        const Key key = contribution->key;
        Count add = 0;
        if (const auto* a = std::get_if<Additive>(&contribution->value)) {
            add = a->count;
        } else {
            const auto token = std::get<DistinctToken>(contribution->value).token;
            const auto tag = (static_cast<std::uint64_t>(key) << 32) | token;
            if (seen[t].insert(tag).second) add = 1;
        }
        if (add == 0) continue;
        auto& values = totals[key];
        if (values.empty()) values.assign(bins, 0);
        values[t] += add;
    }

    batch.series.reserve(totals.size());
    for (auto& [key, values] : totals) {
        batch.series.push_back(BinSeries{key, std::move(values)});
    }
    return batch;
}

double window_origin(std::span<const FlowRecord> records, double delta) {
    if (records.empty()) return 0.0;
    double first = records.front().ts_start;
    for (const auto& r : records) first = std::min(first, r.ts_start);
    return std::floor(first / delta) * delta;
}

std::vector<WindowBatch> partition_windows(std::span<const FlowRecord> records,
                                           const WindowConfig& cfg) {
    cfg.validate();
    std::vector<WindowBatch> out;
    if (records.empty()) return out;
    const double origin = window_origin(records, cfg.delta);

    std::map<int, std::vector<FlowRecord>> by_window;
    int last = 0;
    for (const auto& r : records) {
        const auto global = static_cast<long long>(std::floor((r.ts_start - origin) / cfg.delta));
        const int w = static_cast<int>(global / cfg.bins_per_window);
        by_window[w].push_back(r);
        last = std::max(last, w);
    }
    out.reserve(last + 1);
    for (int w = 0; w <= last; ++w) {
        const auto it = by_window.find(w);
        if (it == by_window.end()) {
            out.push_back(bin_window({}, cfg, w, origin));
        } else {
            out.push_back(bin_window(it->second, cfg, w, origin));
            by_window.erase(it);
        }
    }
    return out;
}

namespace {

GroundTruth parse_truth(std::string_view body, std::size_t line) {
    GroundTruth truth;
    bool have_key = false, have_bin = false, have_eta = false;
    for (const auto field : split_fields(body)) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) throw ParseError(line, "malformed truth field");
        const auto name = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (name == "i0") {
            truth.key = parse_number<Key>(value, line, "i0");
            have_key = true;
        } else if (name == "j0") {
            truth.change_bin = parse_number<int>(value, line, "j0");
            have_bin = true;
        } else if (name == "eta") {
            truth.factor = parse_number<double>(value, line, "eta");
            have_eta = true;
        } else {
            throw ParseError(line, "unknown truth field '" + std::string(name) + "'");
        }
    }
    if (!(have_key && have_bin && have_eta)) throw ParseError(line, "incomplete truth line");
    return truth;
}

}  // namespace

DenseData read_dense_csv(std::istream& in, int bins_per_window) {
    if (bins_per_window < 2) throw std::invalid_argument("bins_per_window must be at least 2");
    DenseData data;
    std::map<int, std::map<Key, std::vector<Count>>> cells;
    std::string line;
    std::size_t line_number = 0;
    bool header_seen = false;
    int last_window = -1;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            constexpr std::string_view tag = "# truth:";
            if (text.starts_with(tag)) data.truth = parse_truth(text.substr(tag.size()), line_number);
            continue;
        }
        if (!header_seen) {
            if (text != dense_csv_header) throw ParseError(line_number, "missing or malformed header");
            header_seen = true;
            continue;
        }
        const auto f = split_fields(text);
        if (f.size() != 3) {
            throw ParseError(line_number, "expected 3 fields, got " + std::to_string(f.size()));
        }
        const auto key = parse_number<Key>(f[0], line_number, "key");
        const auto bin = parse_number<long long>(f[1], line_number, "bin");
        const auto count = parse_number<Count>(f[2], line_number, "count");
        if (bin < 1) throw ParseError(line_number, "bin must be >= 1");
        const int w = static_cast<int>((bin - 1) / bins_per_window);
        const int t = static_cast<int>((bin - 1) % bins_per_window);
        last_window = std::max(last_window, w);
        if (count == 0) continue;
        auto& values = cells[w][key];
        if (values.empty()) values.assign(bins_per_window, 0);
        values[t] += count;
    }
    if (!header_seen) throw ParseError(line_number, "empty input, header required");

    for (int w = 0; w <= last_window; ++w) {
        WindowBatch batch;
        batch.window_index = w;
        batch.start_time = static_cast<double>(w) * bins_per_window;
        batch.bins = bins_per_window;
        if (const auto it = cells.find(w); it != cells.end()) {
            for (auto& [key, values] : it->second) batch.series.push_back({key, std::move(values)});
        }
        data.windows.push_back(std::move(batch));
    }
    return data;
}

void write_dense_csv(std::ostream& out, const WindowBatch& batch,
                     const std::optional<GroundTruth>& truth) {
    if (truth) {
        out << "# truth:i0=" << truth->key << ",j0=" << truth->change_bin
            << ",eta=" << shortest(truth->factor) << '\n';
    }
    out << dense_csv_header << '\n';
    const long long offset = static_cast<long long>(batch.window_index) * batch.bins;
    for (const auto& s : batch.series) {
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (s.values[t] == 0) continue;
            out << s.key << ',' << offset + static_cast<long long>(t) + 1 << ',' << s.values[t] << '\n';
        }
    }
}

}  // namespace rankwatch
