#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rankwatch/flow.hpp"

namespace rankwatch {

inline constexpr std::string_view flow_csv_header =
    "ts_start,ts_end,src_ip,dst_ip,src_port,dst_port,proto,packets,syn,synack,fin,rst";
inline constexpr std::string_view dense_csv_header = "key,bin,count";

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// All keys with nonzero traffic inside one observation window.
struct WindowBatch {
    int window_index = 0;
    double start_time = 0.0;
    int bins = 0;
    std::vector<BinSeries> series;  // sorted by key, keys unique

    std::size_t dim() const { return series.size(); }
    const BinSeries* find(Key key) const;
};

/// Parses one CSV data line. Throws ParseError tagged with `line_number`.
FlowRecord parse_record(std::string_view line, std::size_t line_number = 0);

enum class ErrorPolicy { abort, skip };

struct FlowReadResult {
    std::vector<FlowRecord> records;
    std::vector<ParseError> skipped;
};

/// Reads a headed flow CSV. Under ErrorPolicy::abort the first bad line
/// throws; under ErrorPolicy::skip bad lines are collected and dropped.
FlowReadResult read_flow_csv(std::istream& in, ErrorPolicy policy = ErrorPolicy::abort);

/// Bins the records of window `window_index`, whose first bin starts at
/// origin + window_index * P * delta. A record outside that range is an error.
WindowBatch bin_window(std::span<const FlowRecord> records, const WindowConfig& cfg,
                       int window_index, double origin = 0.0);

/// Window grid origin: the earliest ts_start floored to a multiple of delta.
double window_origin(std::span<const FlowRecord> records, double delta);

/// Splits a trace into consecutive windows starting at window_origin().
/// Every window up to the last one holding data is emitted, including empty
/// ones and a zero-padded trailing partial window.
std::vector<WindowBatch> partition_windows(std::span<const FlowRecord> records,
                                           const WindowConfig& cfg);

struct GroundTruth {
    Key key = 0;
    int change_bin = 0;
    double factor = 1.0;
};

struct DenseData {
    std::vector<WindowBatch> windows;
    std::optional<GroundTruth> truth;
};

/// Reads the `key,bin,count` format (bins are 1-based and global; bin b goes
/// to window (b - 1) / bins_per_window). `# truth:` comment lines are parsed,
/// other `#` lines ignored.
DenseData read_dense_csv(std::istream& in, int bins_per_window);

void write_dense_csv(std::ostream& out, const WindowBatch& batch,
                     const std::optional<GroundTruth>& truth);

}  // namespace rankwatch
