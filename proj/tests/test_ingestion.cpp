#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "rankwatch/flow.hpp"
#include "rankwatch/ingestion.hpp"

using namespace rankwatch;

namespace {

FlowRecord tcp(double ts, Key dst, Count syn, std::uint16_t port = 80, Key src = 1) {
    FlowRecord r;
    r.ts_start = ts;
    r.ts_end = ts + 0.1;
    r.src_ip = src;
    r.dst_ip = dst;
    r.dst_port = port;
    r.proto = Protocol::tcp;
    r.packets = syn + 1;
    r.syn = syn;
    return r;
}

FlowRecord udp(double ts, Key dst, Count packets, std::uint16_t port = 53) {
    FlowRecord r;
    r.ts_start = ts;
    r.ts_end = ts;
    r.dst_ip = dst;
    r.dst_port = port;
    r.proto = Protocol::udp;
    r.packets = packets;
    return r;
}

WindowConfig config(MetricKind metric, int bins) {
    WindowConfig c;
    c.metric = metric;
    c.bins_per_window = bins;
    return c;
}

}  // namespace

TEST(MetricKeyValue, SynFloodReadsSynCounter) {
    const auto c = metric_key_value(tcp(0, 42, 3), MetricKind::syn_flood);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->key, 42u);
    EXPECT_EQ(std::get<Additive>(c->value).count, 3u);
}

TEST(MetricKeyValue, UdpRecordDoesNotCountAsSyn) {
    EXPECT_FALSE(metric_key_value(udp(0, 42, 9), MetricKind::syn_flood));
}

TEST(MetricKeyValue, TcpWithoutSynContributesNothing) {
    EXPECT_FALSE(metric_key_value(tcp(0, 42, 0), MetricKind::syn_flood));
}

TEST(MetricKeyValue, PortScanTokenIsDestinationPort) {
    const auto c = metric_key_value(tcp(0, 42, 1, 80), MetricKind::port_scan);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->key, 42u);
    EXPECT_EQ(std::get<DistinctToken>(c->value).token, 80u);
}

TEST(MetricKeyValue, NetScanKeysBySource) {
    const auto c = metric_key_value(tcp(0, 42, 1, 80, 7), MetricKind::net_scan);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->key, 7u);
    EXPECT_EQ(std::get<DistinctToken>(c->value).token, 42u);
}

TEST(MetricKeyValue, UdpFloodCountsPackets) {
    const auto c = metric_key_value(udp(0, 5, 11), MetricKind::udp_flood);
    ASSERT_TRUE(c);
    EXPECT_EQ(std::get<Additive>(c->value).count, 11u);
    EXPECT_FALSE(metric_key_value(tcp(0, 5, 2), MetricKind::udp_flood));
}

TEST(MetricKeyValue, OtherProtocolHasNoPorts) {
    auto r = udp(0, 5, 1);
    r.proto = Protocol::other;
    EXPECT_FALSE(metric_key_value(r, MetricKind::port_scan));
    EXPECT_TRUE(metric_key_value(r, MetricKind::net_scan));
}

TEST(FlowRecord, ValidateRejectsBrokenInvariants) {
    auto r = tcp(1.5, 1, 1);
    r.ts_end = 1.0;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r = tcp(0, 1, 1);
    r.syn = r.packets + 1;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r = udp(0, 1, 4);
    r.fin = 1;
    EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(ProtocolNames, RoundTrip) {
    for (auto p : {Protocol::tcp, Protocol::udp, Protocol::other}) {
        EXPECT_EQ(parse_protocol(to_string(p)), p);
    }
    for (auto m : {MetricKind::syn_flood, MetricKind::udp_flood, MetricKind::port_scan, MetricKind::net_scan}) {
        EXPECT_EQ(parse_metric(to_string(m)), m);
    }
    EXPECT_FALSE(parse_protocol("ICMP"));
    EXPECT_FALSE(parse_metric("bogus"));
}

TEST(WindowConfig, RejectsBadValues) {
    WindowConfig c;
    c.keep_mprime = 11;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.delta = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.level_alpha = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ParseRecord, MapsFields) {
    const auto r = parse_record("0.00,0.20,167772161,3232235521,443,5555,TCP,4,1,1,1,1", 3);
    EXPECT_DOUBLE_EQ(r.ts_start, 0.0);
    EXPECT_DOUBLE_EQ(r.ts_end, 0.2);
    EXPECT_EQ(r.src_ip, 167772161u);
    EXPECT_EQ(r.dst_ip, 3232235521u);
    EXPECT_EQ(r.src_port, 443);
    EXPECT_EQ(r.dst_port, 5555);
    EXPECT_EQ(r.proto, Protocol::tcp);
    EXPECT_EQ(r.packets, 4u);
    EXPECT_EQ(r.syn, 1u);
    EXPECT_EQ(r.rst, 1u);
}

TEST(ParseRecord, RejectsReversedTimes) {
    try {
        parse_record("1.5,1.0,1,2,3,4,TCP,4,1,1,1,1", 9);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 9u);
    }
}

TEST(ParseRecord, RejectsGarbage) {
    EXPECT_THROW(parse_record("abc,1.0,1,2,3,4,TCP,4,1,1,1,1", 1), ParseError);
    EXPECT_THROW(parse_record("0,1,1,2,3,4,TCP,4,1,1,1", 1), ParseError);
    EXPECT_THROW(parse_record("0,1,1,2,3,70000,TCP,4,1,1,1,1", 1), ParseError);
    EXPECT_THROW(parse_record("0,1,1,2,3,4,SCTP,4,1,1,1,1", 1), ParseError);
    EXPECT_THROW(parse_record("0,1,1,2,3,4,UDP,4,1,0,0,0", 1), ParseError);
}

TEST(ReadFlowCsv, AbortReportsLine) {
    std::istringstream in(std::string(flow_csv_header) + "\n0,1,1,2,3,4,TCP,4,1,0,0,0\nbad\n");
    try {
        read_flow_csv(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ReadFlowCsv, SkipCollectsBadLines) {
    std::istringstream in(std::string(flow_csv_header) + "\n0,1,1,2,3,4,TCP,4,1,0,0,0\nbad\n\n2,3,1,2,3,4,UDP,1,0,0,0,0\n");
    const auto res = read_flow_csv(in, ErrorPolicy::skip);
    EXPECT_EQ(res.records.size(), 2u);
    ASSERT_EQ(res.skipped.size(), 1u);
    EXPECT_EQ(res.skipped[0].line(), 3u);
}

TEST(ReadFlowCsv, RequiresHeader) {
    std::istringstream missing("0,1,1,2,3,4,TCP,4,1,0,0,0\n");
    EXPECT_THROW(read_flow_csv(missing), ParseError);
    std::istringstream empty("");
    EXPECT_THROW(read_flow_csv(empty), ParseError);
}

TEST(BinWindow, AdditiveCountsAccumulate) {
    const std::vector<FlowRecord> recs{tcp(0.1, 9, 2), tcp(0.7, 9, 3)};
    const auto b = bin_window(recs, config(MetricKind::syn_flood, 3), 0);
    ASSERT_EQ(b.series.size(), 1u);
    EXPECT_EQ(b.series[0], (BinSeries{9, {5, 0, 0}}));
}

TEST(BinWindow, DistinctTokensCountOnce) {
    const std::vector<FlowRecord> recs{tcp(0.1, 9, 1, 80), tcp(0.2, 9, 1, 80), tcp(0.3, 9, 1, 81),
                                       tcp(1.3, 9, 1, 80)};
    const auto b = bin_window(recs, config(MetricKind::port_scan, 3), 0);
    ASSERT_EQ(b.series.size(), 1u);
    EXPECT_EQ(b.series[0].values, (std::vector<Count>{2, 1, 0}));
}

TEST(BinWindow, EmptyStreamGivesEmptyBatch) {
    const auto b = bin_window({}, config(MetricKind::syn_flood, 3), 0);
    EXPECT_EQ(b.dim(), 0u);
    EXPECT_EQ(b.bins, 3);
}

TEST(BinWindow, RecordOutsideWindowIsRejected) {
    const std::vector<FlowRecord> recs{tcp(3.5, 1, 1)};
    EXPECT_THROW(bin_window(recs, config(MetricKind::syn_flood, 3), 0), std::invalid_argument);
    EXPECT_NO_THROW(bin_window(recs, config(MetricKind::syn_flood, 3), 1));
}

TEST(BinWindow, SeriesSortedAndFindable) {
    const std::vector<FlowRecord> recs{tcp(0, 30, 1), tcp(0, 10, 1), tcp(1, 20, 1)};
    const auto b = bin_window(recs, config(MetricKind::syn_flood, 2), 0);
    ASSERT_EQ(b.dim(), 3u);
    EXPECT_TRUE(std::is_sorted(b.series.begin(), b.series.end(),
                               [](const BinSeries& x, const BinSeries& y) { return x.key < y.key; }));
    ASSERT_NE(b.find(20), nullptr);
    EXPECT_EQ(b.find(20)->values, (std::vector<Count>{0, 1}));
    EXPECT_EQ(b.find(99), nullptr);
}

TEST(BinWindow, OrderOfRecordsDoesNotMatter) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ts(0.0, 10.0);
    std::uniform_int_distribution<Key> key(1, 6);
    std::uniform_int_distribution<int> port(1, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<FlowRecord> recs;
        for (int i = 0; i < 60; ++i) {
            recs.push_back(tcp(ts(gen), key(gen), 1 + i % 3, static_cast<std::uint16_t>(port(gen)), key(gen)));
        }
        for (auto metric : {MetricKind::syn_flood, MetricKind::port_scan, MetricKind::net_scan}) {
            const auto cfg = config(metric, 10);
            const auto a = bin_window(recs, cfg, 0);
            auto shuffled = recs;
            std::shuffle(shuffled.begin(), shuffled.end(), gen);
            const auto b = bin_window(shuffled, cfg, 0);
            EXPECT_EQ(a.series, b.series);
        }
    }
}

TEST(PartitionWindows, EmitsEveryWindowFromTheOrigin) {
    const std::vector<FlowRecord> recs{tcp(100.4, 1, 1), tcp(101.2, 1, 2), tcp(107.9, 2, 1)};
    const auto windows = partition_windows(recs, config(MetricKind::syn_flood, 3));
    ASSERT_EQ(windows.size(), 3u);
    EXPECT_DOUBLE_EQ(windows[0].start_time, 100.0);
    EXPECT_EQ(windows[0].find(1)->values, (std::vector<Count>{1, 2, 0}));
    EXPECT_EQ(windows[1].dim(), 0u);
    EXPECT_EQ(windows[2].window_index, 2);
    EXPECT_EQ(windows[2].find(2)->values, (std::vector<Count>{0, 1, 0}));
}

TEST(PartitionWindows, PreservesTotalMass) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ts(0.0, 500.0);
    std::uniform_int_distribution<Key> key(1, 40);
    std::vector<FlowRecord> recs;
    Count total = 0;
    for (int i = 0; i < 2000; ++i) {
        recs.push_back(tcp(ts(gen), key(gen), 1 + i % 4));
        total += recs.back().syn;
    }
    Count binned = 0;
    for (const auto& w : partition_windows(recs, config(MetricKind::syn_flood, 60))) {
        for (const auto& s : w.series) {
            for (auto v : s.values) binned += v;
        }
    }
    EXPECT_EQ(binned, total);
}

TEST(DenseCsv, RoundTripWithTruth) {
    WindowBatch b;
    b.bins = 4;
    b.series = {{1, {0, 3, 0, 1}}, {7, {2, 0, 0, 0}}};
    std::ostringstream out;
    write_dense_csv(out, b, GroundTruth{7, 2, 2.5});
    EXPECT_EQ(out.str(), "# truth:i0=7,j0=2,eta=2.5\nkey,bin,count\n1,2,3\n1,4,1\n7,1,2\n");
    std::istringstream in(out.str());
    const auto data = read_dense_csv(in, 4);
    ASSERT_EQ(data.windows.size(), 1u);
    EXPECT_EQ(data.windows[0].series, b.series);
    ASSERT_TRUE(data.truth);
    EXPECT_EQ(data.truth->key, 7u);
    EXPECT_EQ(data.truth->change_bin, 2);
    EXPECT_DOUBLE_EQ(data.truth->factor, 2.5);
}

TEST(DenseCsv, SplitsGlobalBinsIntoWindows) {
    std::istringstream in("key,bin,count\n5,1,1\n5,4,2\n5,7,3\n");
    const auto data = read_dense_csv(in, 3);
    ASSERT_EQ(data.windows.size(), 3u);
    EXPECT_EQ(data.windows[1].find(5)->values, (std::vector<Count>{2, 0, 0}));
    EXPECT_EQ(data.windows[2].find(5)->values, (std::vector<Count>{3, 0, 0}));
    EXPECT_FALSE(data.truth);
}

TEST(DenseCsv, RejectsMalformedInput) {
    std::istringstream no_header("5,1,1\n");
    EXPECT_THROW(read_dense_csv(no_header, 3), ParseError);
    std::istringstream zero_bin("key,bin,count\n5,0,1\n");
    EXPECT_THROW(read_dense_csv(zero_bin, 3), ParseError);
    std::istringstream bad_truth("# truth:i0=1,j0=2\nkey,bin,count\n");
    EXPECT_THROW(read_dense_csv(bad_truth, 3), ParseError);
}
